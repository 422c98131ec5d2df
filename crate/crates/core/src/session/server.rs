use std::io::{self, BufRead, BufReader, Write};
use std::net::{TcpListener, TcpStream, ToSocketAddrs};
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::sync::{Arc, Mutex};
use std::thread;
use std::time::Duration;

use super::clock::SystemClock;
use super::engine::{Session, SessionConfig};
use super::protocol::{encode, ProtocolMessage};
use crate::Resources;

/// Line-protocol server: one session per TCP connection, with a ticker
/// thread streaming frames at the configured rate.
pub struct Server {
    listener: TcpListener,
    res: Arc<Resources>,
    cfg: SessionConfig,
    sessions: AtomicU64,
}

fn send(out: &Mutex<TcpStream>, msgs: &[ProtocolMessage]) -> io::Result<()> {
    if msgs.is_empty() {
        return Ok(());
    }
    let mut buf = String::new();
    for m in msgs {
        buf.push_str(&encode(m));
        buf.push('\n');
    }
    let mut w = out.lock().expect("writer lock");
    w.write_all(buf.as_bytes())?;
    w.flush()
}

impl Server {
    pub fn bind(addr: impl ToSocketAddrs, res: Arc<Resources>, cfg: SessionConfig) -> io::Result<Self> {
        Ok(Server {
            listener: TcpListener::bind(addr)?,
            res,
            cfg,
            sessions: AtomicU64::new(0),
        })
    }

    pub fn local_addr(&self) -> io::Result<std::net::SocketAddr> {
        self.listener.local_addr()
    }

    /// Accept connections forever.
    pub fn run(&self) -> io::Result<()> {
        for stream in self.listener.incoming() {
            match stream {
                Ok(stream) => {
                    let n = self.sessions.fetch_add(1, Ordering::Relaxed) + 1;
                    let res = Arc::clone(&self.res);
                    let cfg = self.cfg.clone();
                    thread::spawn(move || {
                        if let Err(e) = serve(stream, res, cfg, format!("s{n}")) {
                            log::warn!("session s{n}: {e}");
                        }
                    });
                }
                Err(e) => log::warn!("accept failed: {e}"),
            }
        }
        Ok(())
    }
}

/// Run one session over an open connection until the client leaves.
pub fn serve(stream: TcpStream, res: Arc<Resources>, cfg: SessionConfig, id: String) -> io::Result<()> {
    let fps = cfg.fps.max(1);
    let out = Arc::new(Mutex::new(stream.try_clone()?));
    let session = Arc::new(Mutex::new(Session::new(res, cfg, Arc::new(SystemClock::new()), id)));
    let start = session.lock().expect("session lock").start();
    send(&out, &start)?;
    let done = Arc::new(AtomicBool::new(false));

    let ticker = {
        let (session, out, done) = (Arc::clone(&session), Arc::clone(&out), Arc::clone(&done));
        thread::spawn(move || {
            let period = Duration::from_secs_f64(1.0 / f64::from(fps));
            while !done.load(Ordering::Relaxed) {
                thread::sleep(period);
                let msgs = {
                    let mut s = session.lock().expect("session lock");
                    if s.is_ended() {
                        break;
                    }
                    s.tick()
                };
                if send(&out, &msgs).is_err() {
                    break;
                }
            }
        })
    };

    let reader = BufReader::new(stream);
    let mut result = Ok(());
    for line in reader.lines() {
        let line = match line {
            Ok(l) => l,
            Err(e) => {
                result = Err(e);
                break;
            }
        };
        if line.trim().is_empty() {
            continue;
        }
        let (msgs, ended) = {
            let mut s = session.lock().expect("session lock");
            let msgs = s.handle_line(&line);
            (msgs, s.is_ended())
        };
        if let Err(e) = send(&out, &msgs) {
            result = Err(e);
            break;
        }
        if ended {
            break;
        }
    }
    done.store(true, Ordering::Relaxed);
    let tail = session.lock().expect("session lock").end("connection closed");
    let _ = send(&out, &tail);
    let _ = ticker.join();
    result
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::session::protocol::decode;

    #[test]
    fn serves_a_short_session() {
        let cfg = SessionConfig {
            send_mesh: false,
            ..SessionConfig::default()
        };
        let server = Server::bind("127.0.0.1:0", Arc::new(Resources::builtin()), cfg).unwrap();
        let addr = server.local_addr().unwrap();
        thread::spawn(move || server.run());
        let mut conn = TcpStream::connect(addr).unwrap();
        conn.write_all(b"garbage\n{\"seq\":1,\"type\":\"utterance\",\"payload\":{\"text\":\"Hello.\"}}\n{\"seq\":2,\"type\":\"sessionEnd\",\"payload\":{\"reason\":\"bye\"}}\n")
            .unwrap();
        let kinds: Vec<String> = BufReader::new(conn)
            .lines()
            .map(|l| decode(&l.unwrap()).unwrap())
            .map(|m| m.payload.kind().to_string())
            .filter(|k| k != "frame")
            .collect();
        assert_eq!(kinds[0], "sessionStart");
        assert_eq!(kinds[1], "error");
        assert!(kinds.contains(&"response".to_string()));
        assert_eq!(kinds.last().unwrap(), "sessionEnd");
    }
}
