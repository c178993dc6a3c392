//! The token-tagging HTTP protocol, against a throwaway local service that
//! marks capitalized tokens.

use std::error::Error;
use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpListener;
use std::thread;

use paratag::taggers::{
    ner_anchors, ServiceBackend, TagRequest, TagResponse, ANCHOR_LABEL, OUTSIDE_LABEL,
};
use paratag::textcore::{tokenize, LanguageProfile};

fn serve(listener: TcpListener, requests: usize) {
    for stream in listener.incoming().take(requests) {
        let mut stream = stream.expect("accept");
        let mut reader = BufReader::new(stream.try_clone().expect("clone"));
        let mut length = 0;
        loop {
            let mut line = String::new();
            reader.read_line(&mut line).expect("header");
            if line == "\r\n" || line.is_empty() {
                break;
            }
            if let Some((k, v)) = line.split_once(':') {
                if k.eq_ignore_ascii_case("content-length") {
                    length = v.trim().parse().expect("length");
                }
            }
        }
        let mut body = vec![0; length];
        reader.read_exact(&mut body).expect("body");
        let req: TagRequest = serde_json::from_slice(&body).expect("request json");
        let labels = req
            .tokens
            .iter()
            .map(|t| {
                if t.starts_with(char::is_uppercase) {
                    ANCHOR_LABEL
                } else {
                    OUTSIDE_LABEL
                }
                .to_owned()
            })
            .collect();
        let reply = serde_json::to_string(&TagResponse { labels }).expect("reply json");
        write!(
            stream,
            "HTTP/1.1 200 OK\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{reply}",
            reply.len()
        )
        .expect("write");
    }
}

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let listener = TcpListener::bind("127.0.0.1:0")?;
    let url = format!("http://{}/tag", listener.local_addr()?);
    let server = thread::spawn(move || serve(listener, 1));

    let en = LanguageProfile::english();
    let s = tokenize("flights from New York to Lima", &en);
    let backend = ServiceBackend::new(url);
    let anchors = ner_anchors(&s, "en", &backend)?;
    let found: Vec<String> = anchors.iter().map(|a| a.tokens.join(" ")).collect();
    println!("{found:?}");
    assert_eq!(found, ["new york", "lima"]);

    server.join().expect("server thread");
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
