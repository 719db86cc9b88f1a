//! Text formats for instances and wake-up trees.
//!
//! Instance file: line 1 `norm <l1|l2|linf|lp P|polygon k x1 y1 … xk yk>`,
//! line 2 the sleeper count `n`, then `n + 1` lines `x y` with `p0` first.
//!
//! Tree file: one line per node, `idx parent wake_time x y k px1 py1 … pxk pyk`,
//! where the `k` points are the polyline of the edge into the node (endpoints
//! included) and the root has parent `-1` and `k = 0`.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{FtkError, Result};
use crate::norm::{Norm, NormKind};
use crate::point::Point;
use crate::wakeup::{Instance, WakeupTree};

/// Shortest decimal form of `x` with 17 significant digits (like C's `%.17g`).
pub fn fmt17(x: f64) -> String {
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    let sci = format!("{:.16e}", x);
    let (mantissa, exp) = sci.split_once('e').unwrap();
    let exp: i32 = exp.parse().unwrap();
    let negative = mantissa.starts_with('-');
    let digits: String = mantissa.chars().filter(|c| c.is_ascii_digit()).collect();
    let sign = if negative { "-" } else { "" };
    if (-5..17).contains(&exp) {
        let body = if exp >= 0 {
            let split = (exp + 1) as usize;
            format!("{}.{}", &digits[..split], &digits[split..])
        } else {
            format!("0.{}{}", "0".repeat((-exp - 1) as usize), digits)
        };
        let body = body.trim_end_matches('0').trim_end_matches('.');
        format!("{sign}{body}")
    } else {
        let frac = digits[1..].trim_end_matches('0');
        let dot = if frac.is_empty() { "" } else { "." };
        format!("{sign}{}{dot}{frac}e{exp}", &digits[..1])
    }
}

/// Norm token as written on the first line of an instance file.
pub fn emit_norm(norm: &Norm) -> String {
    match norm.kind() {
        NormKind::Lp(p) if *p == 1.0 => "l1".into(),
        NormKind::Lp(p) if *p == 2.0 => "l2".into(),
        NormKind::Lp(p) if p.is_infinite() => "linf".into(),
        NormKind::Lp(p) => format!("lp {}", fmt17(*p)),
        NormKind::Polygon(v) => {
            let mut s = format!("polygon {}", v.len());
            for p in v {
                s.push_str(&format!(" {} {}", fmt17(p.x), fmt17(p.y)));
            }
            s
        }
    }
}

/// Whitespace-separated tokens of a line with their 1-based columns.
fn tokens(line: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, c) in line.char_indices() {
        match (c.is_whitespace(), start) {
            (false, None) => start = Some(i),
            (true, Some(s)) => {
                out.push((s + 1, &line[s..i]));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push((s + 1, &line[s..]));
    }
    out
}

fn parse_err(line: usize, column: usize, message: impl Into<String>) -> FtkError {
    FtkError::Parse { line, column, message: message.into() }
}

fn number(line: usize, tok: (usize, &str)) -> Result<f64> {
    tok.1
        .parse::<f64>()
        .ok()
        .filter(|v| !v.is_nan())
        .ok_or_else(|| parse_err(line, tok.0, format!("expected a number, found '{}'", tok.1)))
}

fn count(line: usize, tok: (usize, &str)) -> Result<usize> {
    tok.1
        .parse::<usize>()
        .map_err(|_| parse_err(line, tok.0, format!("expected a non-negative count, found '{}'", tok.1)))
}

fn expect_end(line: usize, toks: &[(usize, &str)], used: usize) -> Result<()> {
    match toks.get(used) {
        Some(t) => Err(parse_err(line, t.0, format!("unexpected token '{}'", t.1))),
        None => Ok(()),
    }
}

/// Parses the norm description, e.g. `norm lp 3`.
pub fn parse_norm_line(line_no: usize, line: &str) -> Result<Norm> {
    let toks = tokens(line);
    let end_col = line.len() + 1;
    match toks.first() {
        Some((_, "norm")) => {}
        Some(t) => return Err(parse_err(line_no, t.0, format!("expected 'norm', found '{}'", t.1))),
        None => return Err(parse_err(line_no, 1, "expected 'norm <kind>'")),
    }
    let kind = *toks.get(1).ok_or_else(|| parse_err(line_no, end_col, "missing norm kind"))?;
    let need = |k: usize| toks.get(k).copied().ok_or_else(|| parse_err(line_no, end_col, "missing norm parameter"));
    let wrap = |col: usize, r: Result<Norm>| r.map_err(|e| parse_err(line_no, col, e.to_string()));
    let (norm, used) = match kind.1 {
        "l1" => (Norm::l1(), 2),
        "l2" => (Norm::l2(), 2),
        "linf" => (Norm::linf(), 2),
        "lp" => {
            let t = need(2)?;
            (wrap(t.0, Norm::lp(number(line_no, t)?))?, 3)
        }
        "polygon" => {
            let t = need(2)?;
            let k = count(line_no, t)?;
            let mut v = Vec::with_capacity(k);
            for j in 0..k {
                let x = number(line_no, need(3 + 2 * j)?)?;
                let y = number(line_no, need(4 + 2 * j)?)?;
                v.push(Point::new(x, y));
            }
            (wrap(kind.0, Norm::polygon(v))?, 3 + 2 * k)
        }
        other => return Err(parse_err(line_no, kind.0, format!("unknown norm '{other}'"))),
    };
    expect_end(line_no, &toks, used)?;
    Ok(norm)
}

/// Parses an instance file.
pub fn parse_instance(text: &str) -> Result<Instance> {
    let lines: Vec<&str> = text.lines().collect();
    let norm = parse_norm_line(1, lines.first().copied().unwrap_or(""))?;
    let count_line = lines.get(1).copied().unwrap_or("");
    let ctoks = tokens(count_line);
    let n = count(2, *ctoks.first().ok_or_else(|| parse_err(2, 1, "missing sleeper count"))?)?;
    expect_end(2, &ctoks, 1)?;
    let mut last = lines.len();
    while last > 2 && lines[last - 1].trim().is_empty() {
        last -= 1;
    }
    let body = if lines.len() > 2 { &lines[2..last] } else { &[][..] };
    if body.len() != n + 1 {
        let line = if body.len() > n + 1 { n + 4 } else { body.len() + 3 };
        return Err(parse_err(line, 1, format!("expected {} points, got {}", n + 1, body.len())));
    }
    let mut pts = Vec::with_capacity(n + 1);
    for (k, l) in body.iter().enumerate() {
        let line_no = k + 3;
        let t = tokens(l);
        let get =
            |j: usize| t.get(j).copied().ok_or_else(|| parse_err(line_no, l.len() + 1, "expected two coordinates"));
        let x = number(line_no, get(0)?)?;
        let y = number(line_no, get(1)?)?;
        expect_end(line_no, &t, 2)?;
        pts.push(Point::new(x, y));
    }
    let p0 = pts.remove(0);
    Instance::new(norm, p0, pts)
}

/// Canonical text of an instance.
pub fn emit_instance(instance: &Instance) -> String {
    let mut s = format!("norm {}\n{}\n", emit_norm(instance.norm()), instance.n());
    for p in instance.positions() {
        s.push_str(&format!("{} {}\n", fmt17(p.x), fmt17(p.y)));
    }
    s
}

/// Canonical text of a wake-up tree.
pub fn emit_tree(tree: &WakeupTree) -> String {
    let mut s = String::new();
    for v in 0..tree.len() {
        let p = tree.position(v);
        let parent = tree.parent(v).map_or(-1, |u| u as i64);
        let path = if v == 0 { &[][..] } else { tree.path(v) };
        s.push_str(&format!("{v} {parent} {} {} {} {}", fmt17(tree.wake_time(v)), fmt17(p.x), fmt17(p.y), path.len()));
        for q in path {
            s.push_str(&format!(" {} {}", fmt17(q.x), fmt17(q.y)));
        }
        s.push('\n');
    }
    s
}

/// Parses a tree file; wake times are recomputed under `norm` and checked against the file.
pub fn parse_tree(text: &str, norm: &Norm) -> Result<WakeupTree> {
    let mut positions = Vec::new();
    let mut parent = Vec::new();
    let mut paths = Vec::new();
    let mut times = Vec::new();
    for (k, l) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let line_no = k + 1;
        let t = tokens(l);
        let get = |j: usize| t.get(j).copied().ok_or_else(|| parse_err(line_no, l.len() + 1, "line too short"));
        let idx = count(line_no, get(0)?)?;
        if idx != positions.len() {
            return Err(parse_err(line_no, 1, format!("expected node {}, found {idx}", positions.len())));
        }
        let par = get(1)?;
        let par_v: i64 = par
            .1
            .parse()
            .map_err(|_| parse_err(line_no, par.0, format!("expected a parent index, found '{}'", par.1)))?;
        times.push(number(line_no, get(2)?)?);
        positions.push(Point::new(number(line_no, get(3)?)?, number(line_no, get(4)?)?));
        let m = count(line_no, get(5)?)?;
        let mut path = Vec::with_capacity(m);
        for j in 0..m {
            path.push(Point::new(number(line_no, get(6 + 2 * j)?)?, number(line_no, get(7 + 2 * j)?)?));
        }
        expect_end(line_no, &t, 6 + 2 * m)?;
        parent.push(if par_v < 0 { None } else { Some(par_v as usize) });
        paths.push(path);
    }
    if positions.is_empty() {
        return Err(parse_err(1, 1, "empty tree file"));
    }
    let tree = WakeupTree::from_parts(positions, parent, paths, norm)?;
    for (v, &t) in times.iter().enumerate() {
        if (tree.wake_time(v) - t).abs() > 1e-6 * t.abs().max(1.0) {
            return Err(FtkError::Validation(vec![format!(
                "node {v}: file says wake time {t}, path gives {}",
                tree.wake_time(v)
            )]));
        }
    }
    Ok(tree)
}

/// Writes `contents` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, contents: &[u8]) -> std::io::Result<()> {
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("out");
    let tmp = dir.join(format!(".{name}.{}.tmp", std::process::id()));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(contents)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path).inspect_err(|_| {
        let _ = fs::remove_file(&tmp);
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fmt17_round_trips() {
        for x in [0.1, 1.0, -2.5, 1e-7, 123456789.125, 1e300, 5e-324, std::f64::consts::PI, 0.0, -0.0] {
            let s = fmt17(x);
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), x.to_bits(), "{x} -> {s}");
        }
        assert_eq!(fmt17(0.1), "0.10000000000000001");
        assert_eq!(fmt17(1.0), "1");
        assert_eq!(fmt17(-0.5), "-0.5");
    }

    #[test]
    fn parse_examples() {
        let i = parse_instance("norm l1\n2\n0 0\n1 0\n-1 0").unwrap();
        assert_eq!(i.n(), 2);
        assert!(i.norm().is_l1());
        assert_eq!(i.p0(), Point::ORIGIN);
        let i = parse_instance("norm lp 3\n1\n0 0\n0.5 0.5").unwrap();
        assert_eq!(i.norm().kind(), &NormKind::Lp(3.0));
        let e = parse_instance("norm l1\n2\n0 0\n1 0").unwrap_err();
        assert!(e.to_string().contains("expected 3 points, got 2"), "{e}");
    }

    #[test]
    fn parse_errors_locate_the_token() {
        match parse_instance("norm l7\n0\n0 0").unwrap_err() {
            FtkError::Parse { line: 1, column: 6, message } => assert!(message.contains("unknown norm")),
            e => panic!("{e}"),
        }
        match parse_instance("norm l2\n1\n0 0\n0.5 abc").unwrap_err() {
            FtkError::Parse { line: 4, column: 5, .. } => {}
            e => panic!("{e}"),
        }
        assert!(parse_instance("norm l2\nx\n0 0").is_err());
        assert!(parse_instance("norm l2\n0\n0 0\n1 1").unwrap_err().to_string().contains("expected 1 points, got 2"));
    }

    #[test]
    fn instance_round_trip() {
        let norms = [Norm::l1(), Norm::l2(), Norm::linf(), Norm::lp(3.5).unwrap(), Norm::regular_hexagon()];
        for norm in norms {
            let i =
                Instance::new(norm, Point::new(0.1, -0.3), vec![Point::new(0.7, 1.0 / 3.0), Point::new(-1e-9, 0.2)])
                    .unwrap();
            let text = emit_instance(&i);
            let back = parse_instance(&text).unwrap();
            assert_eq!(back, i);
            assert_eq!(emit_instance(&back), text);
        }
    }

    #[test]
    fn tree_round_trip() {
        let norm = Norm::l2();
        let pos = vec![Point::ORIGIN, Point::new(1.0, 0.0), Point::new(0.0, 1.0)];
        let tree = WakeupTree::from_parts(
            pos.clone(),
            vec![None, Some(0), Some(1)],
            vec![vec![], vec![pos[0], Point::new(0.5, 0.1), pos[1]], vec![pos[1], pos[2]]],
            &norm,
        )
        .unwrap();
        let text = emit_tree(&tree);
        assert!(text.starts_with("0 -1 0 0 0 0\n"));
        assert_eq!(parse_tree(&text, &norm).unwrap(), tree);
        let tampered = text.replace("\n1 0 ", "\n1 0 9");
        assert!(parse_tree(&tampered, &norm).is_err());
    }
}
