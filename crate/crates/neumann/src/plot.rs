//! Static SVG histogram of trial gaps.

use std::path::Path;

use plotters::prelude::*;

use crate::error::CliError;

const BINS: usize = 40;

/// Bin counts over `[lo, hi]`.
pub fn bin_counts(values: &[f64], lo: f64, hi: f64, bins: usize) -> Vec<u32> {
    let mut counts = vec![0u32; bins];
    let width = (hi - lo) / bins as f64;
    for &v in values {
        let i = if width > 0.0 { ((v - lo) / width) as usize } else { 0 };
        counts[i.min(bins - 1)] += 1;
    }
    counts
}

pub fn gap_histogram(path: &Path, gaps: &[f64], title: &str) -> Result<(), CliError> {
    let err = |e: &dyn std::fmt::Display| CliError::Output(format!("{}: {e}", path.display()));
    if gaps.is_empty() {
        return Err(CliError::Output("no gaps to plot".into()));
    }
    let lo = gaps.iter().copied().fold(f64::INFINITY, f64::min);
    let mut hi = gaps.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if hi <= lo {
        hi = lo + 1.0;
    }
    let counts = bin_counts(gaps, lo, hi, BINS);
    let top = counts.iter().copied().max().unwrap_or(1);
    let width = (hi - lo) / BINS as f64;

    let root = SVGBackend::new(path, (800, 500)).into_drawing_area();
    root.fill(&WHITE).map_err(|e| err(&e))?;
    let mut chart = ChartBuilder::on(&root)
        .caption(title, ("sans-serif", 22))
        .margin(12)
        .x_label_area_size(40)
        .y_label_area_size(50)
        .build_cartesian_2d(lo..hi, 0u32..top + top / 10 + 1)
        .map_err(|e| err(&e))?;
    chart
        .configure_mesh()
        .x_desc("En(X) - En(X*)")
        .y_desc("trials")
        .draw()
        .map_err(|e| err(&e))?;
    chart
        .draw_series(counts.iter().enumerate().map(|(i, &c)| {
            let x0 = lo + i as f64 * width;
            Rectangle::new([(x0, 0), (x0 + width, c)], BLUE.mix(0.6).filled())
        }))
        .map_err(|e| err(&e))?;
    root.present().map_err(|e| err(&e))?;
    Ok(())
}
