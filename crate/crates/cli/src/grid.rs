//! Numeric list arguments: `a,b,c` or an inclusive range `start:step:stop`.

use crip_core::{Error, Result};

pub fn parse(s: &str) -> Result<Vec<f64>> {
    let bad = |why: &str| Error::Config(format!("bad list {s:?}: {why}"));
    let parts: Vec<&str> = s.split(':').collect();
    match parts.as_slice() {
        [single] => single
            .split(',')
            .map(|v| v.trim().parse::<f64>().map_err(|_| bad("not a number")))
            .collect(),
        [start, step, stop] => {
            let num = |v: &str| v.trim().parse::<f64>().map_err(|_| bad("not a number"));
            let (start, step, stop) = (num(start)?, num(step)?, num(stop)?);
            if !(step > 0.0) || !(stop >= start) || !start.is_finite() || !stop.is_finite() {
                return Err(bad("need step > 0 and stop >= start"));
            }
            let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
            if count > 100_000 {
                return Err(bad("too many points"));
            }
            // computed from the index so rounding does not accumulate
            Ok((0..count).map(|i| start + i as f64 * step).collect())
        }
        _ => Err(bad("expected a,b,c or start:step:stop")),
    }
}

pub fn parse_sizes(s: &str) -> Result<Vec<usize>> {
    s.split(',')
        .map(|v| {
            v.trim()
                .parse::<usize>()
                .map_err(|_| Error::Config(format!("bad size {v:?}")))
        })
        .collect()
}
