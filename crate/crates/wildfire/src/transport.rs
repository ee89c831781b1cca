//! Transports for the line protocol: stdio, TCP, websocket, and a minimal
//! static file server for the console bundle.

use std::io::{self, BufRead, BufReader, Read, Write};
use std::net::{TcpListener, TcpStream};
use std::path::{Component, Path, PathBuf};
use std::sync::Arc;
use std::thread;

use log::{info, warn};
use tungstenite::Message;
use wildfire_core::fuel::FuelCatalog;

use crate::protocol::Session;

/// Runs one session over a line reader/writer until EOF or `close`.
pub fn serve_lines<R: BufRead, W: Write>(session: &mut Session, input: R, mut out: W) -> io::Result<()> {
    for line in input.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let reply = session.handle_line(&line);
        out.write_all(reply.as_bytes())?;
        out.write_all(b"\n")?;
        out.flush()?;
        if session.is_closed() {
            break;
        }
    }
    Ok(())
}

pub fn serve_stdio(catalog: Arc<FuelCatalog>, base_dir: PathBuf) -> io::Result<()> {
    let mut session = Session::new(catalog, base_dir);
    let stdin = io::stdin();
    serve_lines(&mut session, stdin.lock(), io::stdout().lock())
}

/// One thread and one environment per connection.
pub fn serve_tcp(listener: TcpListener, catalog: Arc<FuelCatalog>, base_dir: PathBuf) -> io::Result<()> {
    info!("protocol listening on {}", listener.local_addr()?);
    for stream in listener.incoming() {
        let stream = stream?;
        let (catalog, base_dir) = (catalog.clone(), base_dir.clone());
        thread::spawn(move || {
            let peer = stream.peer_addr().ok();
            let mut session = Session::new(catalog, base_dir);
            let result = stream
                .try_clone()
                .and_then(|w| serve_lines(&mut session, BufReader::new(stream), w));
            if let Err(e) = result {
                warn!("session {peer:?} ended: {e}");
            }
        });
    }
    Ok(())
}

/// Same payloads, one protocol message per websocket text frame.
pub fn serve_websocket(listener: TcpListener, catalog: Arc<FuelCatalog>, base_dir: PathBuf) -> io::Result<()> {
    info!("websocket listening on {}", listener.local_addr()?);
    for stream in listener.incoming() {
        let stream = stream?;
        let (catalog, base_dir) = (catalog.clone(), base_dir.clone());
        thread::spawn(move || {
            let mut ws = match tungstenite::accept(stream) {
                Ok(ws) => ws,
                Err(e) => return warn!("websocket handshake failed: {e}"),
            };
            let mut session = Session::new(catalog, base_dir);
            loop {
                let text = match ws.read() {
                    Ok(Message::Text(t)) => t,
                    Ok(Message::Close(_)) => break,
                    Ok(_) => continue,
                    Err(e) => {
                        warn!("websocket session ended: {e}");
                        break;
                    }
                };
                let reply = session.handle_line(&text);
                if let Err(e) = ws.send(Message::Text(reply)) {
                    warn!("websocket send failed: {e}");
                    break;
                }
                if session.is_closed() {
                    let _ = ws.close(None);
                    break;
                }
            }
        });
    }
    Ok(())
}

fn content_type(path: &Path) -> &'static str {
    match path.extension().and_then(|e| e.to_str()) {
        Some("html") => "text/html; charset=utf-8",
        Some("js" | "mjs") => "text/javascript",
        Some("css") => "text/css",
        Some("json") => "application/json",
        Some("svg") => "image/svg+xml",
        Some("png") => "image/png",
        _ => "application/octet-stream",
    }
}

/// Maps a request target onto `root`, refusing anything that climbs out.
pub fn resolve_static(root: &Path, target: &str) -> Option<PathBuf> {
    let path = target.split(['?', '#']).next().unwrap_or("/");
    let mut out = root.to_path_buf();
    for c in Path::new(path.trim_start_matches('/')).components() {
        match c {
            Component::Normal(p) => out.push(p),
            Component::CurDir => {}
            _ => return None,
        }
    }
    if out.is_dir() {
        out.push("index.html");
    }
    Some(out)
}

fn handle_http(mut stream: TcpStream, root: &Path) -> io::Result<()> {
    let mut reader = BufReader::new(stream.try_clone()?);
    let mut request_line = String::new();
    reader.read_line(&mut request_line)?;
    let mut header = String::new();
    while reader.read_line(&mut header)? > 2 {
        header.clear();
    }
    let mut parts = request_line.split_whitespace();
    let (method, target) = (parts.next().unwrap_or(""), parts.next().unwrap_or("/"));
    let file = (method == "GET")
        .then(|| resolve_static(root, target))
        .flatten()
        .and_then(|p| std::fs::File::open(&p).ok().map(|f| (p, f)));
    match file {
        Some((p, mut f)) => {
            let mut body = Vec::new();
            f.read_to_end(&mut body)?;
            write!(
                stream,
                "HTTP/1.1 200 OK\r\nContent-Type: {}\r\nContent-Length: {}\r\nConnection: close\r\n\r\n",
                content_type(&p),
                body.len()
            )?;
            stream.write_all(&body)
        }
        None => stream.write_all(b"HTTP/1.1 404 Not Found\r\nContent-Length: 0\r\nConnection: close\r\n\r\n"),
    }
}

pub fn serve_http(listener: TcpListener, root: PathBuf) -> io::Result<()> {
    info!("static files from {} on {}", root.display(), listener.local_addr()?);
    let root = Arc::new(root);
    for stream in listener.incoming() {
        let stream = stream?;
        let root = root.clone();
        thread::spawn(move || {
            if let Err(e) = handle_http(stream, &root) {
                warn!("http: {e}");
            }
        });
    }
    Ok(())
}
