//! CSV output: `#` metadata lines, a header row, data rows, then `# key=value`
//! footer lines. Numbers are written with `{:e}`, which round-trips exactly.

use std::fmt::Write as _;

use abwave_core::analysis::{Pattern, PatternMetrics, SweepRow};
use abwave_core::{Error, Grid, Result};

pub const MAGIC: &str = "# abwave v1";

fn metrics_lines(out: &mut String, prefix: &str, m: &Result<PatternMetrics>) {
    match m {
        Ok(m) => {
            let _ = writeln!(out, "# {prefix}central_max_x={:e}", m.central_max_x);
            let _ = writeln!(out, "# {prefix}fringe_spacing={:e}", m.fringe_spacing);
            let _ = writeln!(out, "# {prefix}visibility={:e}", m.visibility);
            let _ = writeln!(out, "# {prefix}n_fringes={}", m.n_fringes);
        }
        Err(e) => {
            let _ = writeln!(out, "# {prefix}metrics_error={e}");
        }
    }
}

fn header(out: &mut String, meta: &[(&str, String)]) {
    out.push_str(MAGIC);
    out.push('\n');
    for (k, v) in meta {
        let _ = writeln!(out, "# {k}={v}");
    }
}

pub fn pattern_csv(meta: &[(&str, String)], p: &Pattern, m: &Result<PatternMetrics>) -> String {
    let mut out = String::with_capacity(48 * p.intensity.len());
    header(&mut out, meta);
    out.push_str("x,intensity\n");
    for (x, i) in p.grid.xs().zip(&p.intensity) {
        let _ = writeln!(out, "{x:e},{i:e}");
    }
    metrics_lines(&mut out, "", m);
    out
}

/// Several patterns on one grid, one column each, with per-column metrics
/// footers prefixed `<column>.` and any extra footer lines appended.
pub fn joined_csv(
    meta: &[(&str, String)],
    columns: &[(&str, &Pattern, Result<PatternMetrics>)],
    extra_footer: &[(String, String)],
) -> String {
    let mut out = String::new();
    header(&mut out, meta);
    out.push('x');
    for (name, _, _) in columns {
        let _ = write!(out, ",{name}");
    }
    out.push('\n');
    if let Some((_, first, _)) = columns.first() {
        for (i, x) in first.grid.xs().enumerate() {
            let _ = write!(out, "{x:e}");
            for (_, p, _) in columns {
                let _ = write!(out, ",{:e}", p.intensity[i]);
            }
            out.push('\n');
        }
    }
    for (name, _, m) in columns {
        metrics_lines(&mut out, &format!("{name}."), m);
    }
    for (k, v) in extra_footer {
        let _ = writeln!(out, "# {k}={v}");
    }
    out
}

pub fn sweep_csv(meta: &[(&str, String)], rows: &[SweepRow]) -> String {
    let mut out = String::new();
    header(&mut out, meta);
    out.push_str("value,central_max_x,fringe_spacing,visibility,n_fringes,slit_phase_difference\n");
    for r in rows {
        let _ = write!(out, "{:e},", r.value);
        match &r.metrics {
            Some(m) => {
                let _ = write!(
                    out,
                    "{:e},{:e},{:e},{},",
                    m.central_max_x, m.fringe_spacing, m.visibility, m.n_fringes
                );
            }
            None => out.push_str(",,,,"),
        }
        let _ = writeln!(out, "{:e}", r.slit_phase_difference);
    }
    out
}

/// A pattern CSV read back: metadata and footer pairs plus the data.
#[derive(Debug, Clone, PartialEq)]
pub struct PatternCsv {
    pub meta: Vec<(String, String)>,
    pub footer: Vec<(String, String)>,
    pub x: Vec<f64>,
    pub intensity: Vec<f64>,
}

impl PatternCsv {
    pub fn meta_value(&self, key: &str) -> Option<&str> {
        self.meta
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn footer_value(&self, key: &str) -> Option<&str> {
        self.footer
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    /// The data as a [`Pattern`] on the uniform grid through its endpoints.
    pub fn to_pattern(&self) -> Result<Pattern> {
        let (first, last) = match (self.x.first(), self.x.last()) {
            (Some(a), Some(b)) => (*a, *b),
            _ => return Err(Error::validation("csv", "no data rows")),
        };
        let grid = Grid::centered(0.5 * (first + last), 0.5 * (last - first), self.x.len())?;
        Pattern::new(
            grid,
            self.intensity.clone(),
            self.meta_value("scenario").unwrap_or("").to_string(),
            self.meta_value("model").unwrap_or("").to_string(),
        )
    }
}

/// Parses the output of [`pattern_csv`].
pub fn parse_pattern_csv(text: &str) -> Result<PatternCsv> {
    let bad = |line: usize, msg: &str| Error::validation("csv", format!("line {line}: {msg}"));
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    match lines.next() {
        Some((_, MAGIC)) => {}
        _ => return Err(bad(1, "missing `# abwave v1` header")),
    }
    let mut out = PatternCsv {
        meta: Vec::new(),
        footer: Vec::new(),
        x: Vec::new(),
        intensity: Vec::new(),
    };
    let mut seen_header = false;
    for (no, line) in lines {
        if let Some(rest) = line.strip_prefix("# ") {
            let (k, v) = rest
                .split_once('=')
                .ok_or_else(|| bad(no, "expected `# key=value`"))?;
            let pair = (k.to_string(), v.to_string());
            if seen_header {
                out.footer.push(pair);
            } else {
                out.meta.push(pair);
            }
        } else if !seen_header {
            if line != "x,intensity" {
                return Err(bad(no, "expected `x,intensity`"));
            }
            seen_header = true;
        } else {
            let (x, i) = line
                .split_once(',')
                .ok_or_else(|| bad(no, "expected two columns"))?;
            out.x.push(x.parse().map_err(|_| bad(no, "bad x"))?);
            out.intensity
                .push(i.parse().map_err(|_| bad(no, "bad intensity"))?);
        }
    }
    Ok(out)
}
