//! Stand-in generator process for protocol tests.
//!
//! usage: furnish-mock-adapter MODE [ARG]
//!
//! Modes:
//!   echo         4x2 grid whose pixels encode the first latent values
//!   procedural   builtin synthetic generator; ARG is a palette CSV
//!   wrong-length payload one byte short
//!   bad-id       replies with id + 1
//!   exit         handshakes, then exits on the first request
//!   hang         handshakes, then never replies
//!   garbage      replies with a line that is not JSON
//!   no-hello     never handshakes

use std::io::{BufRead, Write};

use base64::Engine;
use furnish_core::generator::external::{encode_hello, encode_response, Hello, BYE};
use furnish_core::generator::{SynthGenerator, SynthParams};
use furnish_core::grid::OccupancyGrid;
use furnish_core::palette::CategoryPalette;
use furnish_core::Rgb;
use serde::Deserialize;

#[derive(Deserialize)]
struct Request {
    id: u64,
    z: Vec<f64>,
}

fn echo_grid(z: &[f64]) -> OccupancyGrid {
    let pixels = (0..8)
        .map(|i| {
            let v = z.get(i).copied().unwrap_or(0.0);
            let b = (v * 10.0).round().clamp(0.0, 255.0) as u8;
            Rgb([b, b, b])
        })
        .collect();
    OccupancyGrid::from_pixels(4, 2, pixels).expect("8 pixels")
}

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let mode = args.first().map(String::as_str).unwrap_or("echo");
    let synth = (mode == "procedural").then(|| {
        let path = args.get(1).expect("procedural mode needs a palette path");
        let palette = CategoryPalette::read_csv(path).expect("readable palette");
        SynthGenerator::new(palette, SynthParams::default()).expect("valid params")
    });
    let hello = match &synth {
        Some(g) => Hello {
            latent_dim: g.params().latent_dim,
            width: g.params().width,
            height: g.params().height,
        },
        None => Hello {
            latent_dim: 8,
            width: 4,
            height: 2,
        },
    };

    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    if mode == "no-hello" {
        std::thread::sleep(std::time::Duration::from_secs(3600));
        return;
    }
    writeln!(out, "{}", encode_hello(hello)).unwrap();
    out.flush().unwrap();

    for line in std::io::stdin().lock().lines() {
        let Ok(line) = line else { return };
        if line.trim() == BYE {
            return;
        }
        let req: Request = serde_json::from_str(&line).expect("well-formed request");
        let reply = match mode {
            "exit" => std::process::exit(3),
            "hang" => {
                std::thread::sleep(std::time::Duration::from_secs(3600));
                return;
            }
            "garbage" => "this is not json".to_string(),
            "bad-id" => encode_response(req.id + 1, &echo_grid(&req.z)),
            "wrong-length" => {
                let mut bytes = echo_grid(&req.z).to_rgb_bytes();
                bytes.pop();
                let b64 = base64::engine::general_purpose::STANDARD.encode(bytes);
                format!(r#"{{"id":{},"rgb_b64":"{b64}"}}"#, req.id)
            }
            "procedural" => encode_response(req.id, &synth.as_ref().unwrap().generate(&req.z).expect("valid latent")),
            _ => encode_response(req.id, &echo_grid(&req.z)),
        };
        writeln!(out, "{reply}").unwrap();
        out.flush().unwrap();
    }
}
