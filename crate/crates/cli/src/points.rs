//! `--at` and `--grid` point specifications.

use anyhow::{anyhow, bail, Context, Result};
use galilean_core::ChartPoint;

/// Largest number of points a `--grid` may expand to.
pub const MAX_GRID_POINTS: usize = 1_000_000;

fn parse_number(s: &str) -> Result<f64> {
    let v: f64 = s.trim().parse().with_context(|| format!("not a number: {s:?}"))?;
    if !v.is_finite() {
        bail!("not a finite number: {s:?}");
    }
    Ok(v)
}

fn parse_list(s: &str) -> Result<Vec<f64>> {
    let inner = s
        .trim()
        .strip_prefix('[')
        .and_then(|r| r.strip_suffix(']'))
        .ok_or_else(|| anyhow!("expected a bracketed list, got {s:?}"))?;
    if inner.trim().is_empty() {
        return Ok(Vec::new());
    }
    inner.split(',').map(parse_number).collect()
}

/// Splits on commas that are not inside brackets.
fn split_top_level(s: &str) -> Vec<&str> {
    let mut parts = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, c) in s.char_indices() {
        match c {
            '[' => depth += 1,
            ']' => depth -= 1,
            ',' if depth == 0 => {
                parts.push(&s[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    parts.push(&s[start..]);
    parts
}

/// Parses `t=0,x=[2],y=[1]`; omitted parts default to zero.
pub fn parse_point(spec: &str, n: usize) -> Result<ChartPoint> {
    let mut p = ChartPoint::origin(n);
    for part in split_top_level(spec) {
        let (key, value) = part.split_once('=').ok_or_else(|| anyhow!("expected key=value in {part:?}"))?;
        match key.trim() {
            "t" => p.t = parse_number(value)?,
            key @ ("x" | "y") => {
                let list = parse_list(value)?;
                if list.len() != n {
                    bail!("{key} has {} entries, expected {n}", list.len());
                }
                if key == "x" {
                    p.x = list;
                } else {
                    p.y = list;
                }
            }
            other => bail!("unknown coordinate {other:?} (expected t, x or y)"),
        }
    }
    Ok(p)
}

/// Expands `lo:hi:count` to the tensor grid over all `2n+1` coordinates,
/// last coordinate fastest.
pub fn parse_grid(spec: &str, n: usize) -> Result<Vec<ChartPoint>> {
    let parts: Vec<&str> = spec.split(':').collect();
    let [lo, hi, count] = parts[..] else {
        bail!("grid must be lo:hi:count, got {spec:?}");
    };
    let (lo, hi) = (parse_number(lo)?, parse_number(hi)?);
    let count: usize = count.trim().parse().with_context(|| format!("bad grid count {count:?}"))?;
    if count == 0 || hi < lo {
        bail!("grid needs count ≥ 1 and lo ≤ hi");
    }
    let dims = 2 * n + 1;
    let total = (0..dims).try_fold(1usize, |acc, _| acc.checked_mul(count).filter(|t| *t <= MAX_GRID_POINTS));
    let total = total.ok_or_else(|| anyhow!("grid expands to more than {MAX_GRID_POINTS} points"))?;
    let value = |k: usize| if count == 1 { lo } else { lo + (hi - lo) * k as f64 / (count - 1) as f64 };
    Ok((0..total)
        .map(|mut idx| {
            let mut coords = vec![0.0; dims];
            for c in coords.iter_mut().rev() {
                *c = value(idx % count);
                idx /= count;
            }
            ChartPoint::from_coords(n, &coords)
        })
        .collect())
}
