use anyhow::{Context, Result};
use itfmap_core::exponents;

use super::Outcome;
use crate::config::{parse_usize, Config};
use crate::inputs::parse_q;

pub const KEYS: [&str; 2] = ["n", "q"];

pub fn run(cfg: &Config) -> Result<Outcome> {
    let n = cfg.get("n", 3, parse_usize)?;
    let q = parse_q(cfg.require("q")?).context("bad value for \"q\"")?;
    let t = exponents(n, q)?;
    let mut out = Outcome::default();
    out.report.push(format!(
        "q_n={}, p_n={}, p={}, r={}",
        t.q_n, t.p_n, t.p, t.r
    ));
    if t.clamped {
        out.report
            .push(format!("q={} clamped to (n+1)/2 = {}", t.requested_q, t.q));
    }
    out.artifacts.text(
        "exponents.csv",
        &[
            "n,q,q_n,p_n,p,r,clamped".to_string(),
            format!(
                "{n},{},{},{},{},{},{}",
                t.q, t.q_n, t.p_n, t.p, t.r, t.clamped
            ),
        ],
        "",
    );
    Ok(out)
}
