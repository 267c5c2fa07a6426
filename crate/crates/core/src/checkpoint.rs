//! Checkpoint container: a text manifest (schema version, scheme
//! hyperparameters, tensor names/shapes in order) terminated by a `data`
//! line, followed by every tensor's entries as little-endian 64-bit floats
//! concatenated in manifest order.

use crate::error::{Error, Result};
use crate::nn::Activation;
use crate::scheme::{SchemeConfig, SchemeParams};
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

const MAGIC: &str = "codedcomp-checkpoint";
const VERSION: u32 = 1;

/// Tensor list in flat-parameter order, with cols = 0 marking a bias.
fn manifest_tensors(cfg: &SchemeConfig, params: &SchemeParams) -> Vec<(String, usize, usize)> {
    let mut tensors = Vec::new();
    for (g, enc) in params.encoders.iter().enumerate() {
        tensors.extend(enc.tensor_shapes(&format!("encoder{g}")));
    }
    tensors.extend(params.lambda0.tensor_shapes("lambda0"));
    for p in 1..=cfg.p {
        tensors.push((format!("vrest{p}"), cfg.v, cfg.m * cfg.m));
    }
    tensors
}

pub fn save_scheme(path: &Path, cfg: &SchemeConfig, params: &SchemeParams) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(w, "{MAGIC} {VERSION}")?;
    writeln!(w, "m {}", cfg.m)?;
    writeln!(w, "k {}", cfg.k)?;
    writeln!(w, "g {}", cfg.g)?;
    writeln!(w, "p {}", cfg.p)?;
    writeln!(w, "v {}", cfg.v)?;
    writeln!(w, "activation {}", cfg.hidden_activation.name())?;
    let hidden: Vec<String> = cfg.hidden_layers.iter().map(|h| h.to_string()).collect();
    writeln!(w, "hidden {}", hidden.join(" "))?;
    let betas: Vec<String> = cfg.betas.iter().map(|b| b.to_string()).collect();
    writeln!(w, "betas {}", betas.join(" "))?;
    for (name, rows, cols) in manifest_tensors(cfg, params) {
        writeln!(w, "tensor {name} {rows} {cols}")?;
    }
    writeln!(w, "data")?;
    for x in params.to_flat() {
        w.write_all(&x.to_le_bytes())?;
    }
    Ok(())
}

fn bad(msg: impl Into<String>) -> Error {
    Error::Checkpoint(msg.into())
}

pub fn load_scheme(path: &Path) -> Result<(SchemeConfig, SchemeParams)> {
    let mut r = BufReader::new(std::fs::File::open(path)?);

    let mut header = String::new();
    r.read_line(&mut header)?;
    let mut it = header.split_whitespace();
    if it.next() != Some(MAGIC) {
        return Err(bad("not a checkpoint file"));
    }
    let version: u32 = it
        .next()
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| bad("missing schema version"))?;
    if version != VERSION {
        return Err(bad(format!("unsupported schema version {version}")));
    }

    let mut fields: std::collections::HashMap<String, String> = Default::default();
    let mut tensors: Vec<(String, usize, usize)> = Vec::new();
    loop {
        let mut line = String::new();
        if r.read_line(&mut line)? == 0 {
            return Err(bad("manifest ended before data section"));
        }
        let line = line.trim_end();
        if line == "data" {
            break;
        }
        let (key, rest) = line
            .split_once(' ')
            .ok_or_else(|| bad(format!("malformed manifest line '{line}'")))?;
        if key == "tensor" {
            let parts: Vec<&str> = rest.split_whitespace().collect();
            if parts.len() != 3 {
                return Err(bad(format!("malformed tensor line '{line}'")));
            }
            let rows = parts[1].parse().map_err(|_| bad("bad tensor rows"))?;
            let cols = parts[2].parse().map_err(|_| bad("bad tensor cols"))?;
            tensors.push((parts[0].to_string(), rows, cols));
        } else {
            fields.insert(key.to_string(), rest.to_string());
        }
    }

    let get = |key: &str| -> Result<&String> {
        fields
            .get(key)
            .ok_or_else(|| bad(format!("manifest missing '{key}'")))
    };
    let parse_usize = |key: &str| -> Result<usize> {
        get(key)?
            .parse()
            .map_err(|_| bad(format!("manifest field '{key}' is not an integer")))
    };
    let m = parse_usize("m")?;
    let k = parse_usize("k")?;
    let g = parse_usize("g")?;
    let p = parse_usize("p")?;
    let v = parse_usize("v")?;
    let activation =
        Activation::parse(get("activation")?).map_err(|e| bad(format!("bad activation: {e}")))?;
    let hidden: Vec<usize> = get("hidden")?
        .split_whitespace()
        .map(|s| s.parse().map_err(|_| bad("bad hidden layer size")))
        .collect::<Result<_>>()?;
    let betas: Vec<f64> = get("betas")?
        .split_whitespace()
        .map(|s| s.parse().map_err(|_| bad("bad beta value")))
        .collect::<Result<_>>()?;

    let cfg = SchemeConfig::new(m, k, g, p, v)
        .with_hidden(hidden)
        .with_activation(activation)
        .with_betas(betas);
    cfg.validate()
        .map_err(|e| bad(format!("invalid config: {e}")))?;

    let params = SchemeParams::zeros(&cfg);
    let expected = manifest_tensors(&cfg, &params);
    if tensors != expected {
        return Err(bad(format!(
            "tensor list does not match config shapes (got {} tensors, expected {})",
            tensors.len(),
            expected.len()
        )));
    }
    let total: usize = tensors
        .iter()
        .map(|(_, rows, cols)| rows * cols.max(&1))
        .sum();

    let mut bytes = Vec::with_capacity(total * 8);
    r.read_to_end(&mut bytes)?;
    if bytes.len() != total * 8 {
        return Err(bad(format!(
            "payload holds {} bytes, expected {}",
            bytes.len(),
            total * 8
        )));
    }
    let flat: Vec<f64> = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    let mut params = params;
    params.assign_from_flat(&flat)?;
    Ok((cfg, params))
}
