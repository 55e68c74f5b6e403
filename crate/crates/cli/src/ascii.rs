use abwave_core::analysis::Pattern;

pub const WIDTH: usize = 64;
pub const HEIGHT: usize = 16;

/// Column-maximum bar chart of a pattern, `WIDTH` columns by `HEIGHT` rows,
/// followed by an axis line and the x range.
pub fn render(p: &Pattern) -> String {
    let n = p.intensity.len();
    let cols: Vec<f64> = (0..WIDTH)
        .map(|c| {
            let lo = c * n / WIDTH;
            let hi = ((c + 1) * n / WIDTH).max(lo + 1).min(n);
            p.intensity[lo..hi].iter().copied().fold(0.0, f64::max)
        })
        .collect();
    let peak = cols.iter().copied().fold(0.0, f64::max);
    let heights: Vec<usize> = cols
        .iter()
        .map(|v| {
            if peak > 0.0 {
                (v / peak * HEIGHT as f64).round() as usize
            } else {
                0
            }
        })
        .collect();
    let mut out = String::with_capacity((WIDTH + 1) * (HEIGHT + 2));
    for row in (1..=HEIGHT).rev() {
        for &h in &heights {
            out.push(if h >= row { '#' } else { ' ' });
        }
        out.push('\n');
    }
    out.push_str(&"-".repeat(WIDTH));
    out.push('\n');
    let left = format!("{:.4e}", p.grid.first());
    let right = format!("{:.4e}", p.grid.last());
    let gap = WIDTH.saturating_sub(left.len() + right.len()).max(1);
    out.push_str(&left);
    out.push_str(&" ".repeat(gap));
    out.push_str(&right);
    out.push('\n');
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use abwave_core::Grid;

    #[test]
    fn dimensions() {
        let grid = Grid::centered(0.0, 1.0, 501).unwrap();
        let i: Vec<f64> = grid.xs().map(|x| (1.0 - x * x).max(0.0)).collect();
        let text = render(&Pattern::new(grid, i, String::new(), String::new()).unwrap());
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), HEIGHT + 2);
        assert!(lines[..=HEIGHT].iter().all(|l| l.chars().count() == WIDTH));
        assert!(lines[0].contains('#'));
    }

    #[test]
    fn zero_pattern_is_blank() {
        let grid = Grid::centered(0.0, 1.0, 10).unwrap();
        let text =
            render(&Pattern::new(grid, vec![0.0; 10], String::new(), String::new()).unwrap());
        assert!(!text.contains('#'));
    }
}
