//! Log-log line charts of sweep CSVs as self-contained SVG.
//!
//! The sweep kind is recognised from the header. One series is drawn per
//! (ξ, SNR) group for minimum-loss-factor tables and per (beam, radius) group
//! for loss-factor tables; the latter also get a shaded band above the
//! `beta_min_sq` threshold curve.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct PlotSpec {
    pub width: f64,
    pub height: f64,
    pub title: Option<String>,
}

impl Default for PlotSpec {
    fn default() -> Self {
        Self {
            width: 720.0,
            height: 480.0,
            title: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Chart {
    pub y_label: String,
    pub series: Vec<Series>,
    /// Lower edge of the shaded region, as (M, β²_min) points.
    pub shade: Vec<(f64, f64)>,
}

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

/// Reads a sweep CSV into a chart. Parse failures carry the CSV line number.
pub fn read_chart(csv_text: &str) -> Result<Chart> {
    let mut reader = csv::Reader::from_reader(csv_text.as_bytes());
    let header: Vec<String> = reader
        .headers()
        .context("reading CSV header")?
        .iter()
        .map(str::to_string)
        .collect();
    let col = |name: &str| header.iter().position(|h| h == name);
    let m_col = col("m").ok_or_else(|| anyhow!("CSV has no 'm' column"))?;
    let (y_col, y_label, group_cols) = if let Some(y) = col("beta_sq") {
        let radius = col("rho0").or_else(|| col("rho")).ok_or_else(|| anyhow!("CSV has no rho column"))?;
        let beam = col("beam").ok_or_else(|| anyhow!("CSV has no 'beam' column"))?;
        (y, "loss factor β²", vec![beam, radius])
    } else if let Some(y) = col("beta_min_sq") {
        let xi = col("xi").ok_or_else(|| anyhow!("CSV has no 'xi' column"))?;
        let snr = col("gamma_star_db").ok_or_else(|| anyhow!("CSV has no 'gamma_star_db' column"))?;
        (y, "minimum loss factor β²_min", vec![xi, snr])
    } else {
        bail!("CSV has neither a 'beta_sq' nor a 'beta_min_sq' column");
    };
    let shade_col = if y_label.starts_with("loss") { col("beta_min_sq") } else { None };

    let mut groups: Vec<(String, Vec<(f64, f64)>)> = Vec::new();
    let mut shade: BTreeMap<u64, f64> = BTreeMap::new();
    for record in reader.records() {
        let record = record.context("malformed CSV")?;
        let line = record.position().map_or(0, |p| p.line());
        let num = |i: usize| -> Result<f64> {
            let field = record.get(i).unwrap_or("");
            field
                .parse::<f64>()
                .with_context(|| format!("line {line}: cannot parse '{field}' in column '{}'", header[i]))
        };
        let m = num(m_col)?;
        let y = num(y_col)?;
        let label = match y_label.starts_with("loss") {
            true => format!(
                "{} {}={}",
                record.get(group_cols[0]).unwrap_or(""),
                header[group_cols[1]],
                record.get(group_cols[1]).unwrap_or("")
            ),
            false => format!(
                "ξ={} {} dB",
                record.get(group_cols[0]).unwrap_or(""),
                record.get(group_cols[1]).unwrap_or("")
            ),
        };
        match groups.iter_mut().find(|(l, _)| *l == label) {
            Some((_, pts)) => pts.push((m, y)),
            None => groups.push((label, vec![(m, y)])),
        }
        if let Some(c) = shade_col {
            shade.insert(m.to_bits(), num(c)?);
        }
    }
    if groups.is_empty() {
        bail!("CSV has no data rows");
    }
    let mut shade: Vec<(f64, f64)> = shade.into_iter().map(|(m, b)| (f64::from_bits(m), b)).collect();
    shade.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(Chart {
        y_label: y_label.to_string(),
        series: groups
            .into_iter()
            .map(|(label, points)| Series { label, points })
            .collect(),
        shade,
    })
}

fn decade_bounds(values: impl Iterator<Item = f64>) -> Option<(f64, f64)> {
    let (lo, hi) = values
        .filter(|v| *v > 0.0 && v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if lo > hi {
        return None;
    }
    let lo = lo.log10().floor();
    let hi = hi.log10().ceil().max(lo + 1.0);
    Some((lo, hi))
}

/// Renders a chart. Points with non-positive coordinates cannot be placed on
/// log axes and are left out.
pub fn render_svg(chart: &Chart, spec: &PlotSpec) -> Result<String> {
    let all = || chart.series.iter().flat_map(|s| s.points.iter());
    let (x0, x1) = decade_bounds(all().map(|p| p.0)).ok_or_else(|| anyhow!("no positive M values to plot"))?;
    let (y0, y1) = decade_bounds(all().map(|p| p.1)).ok_or_else(|| anyhow!("no positive y values to plot"))?;
    let (left, right, top, bottom) = (70.0, 180.0, 40.0, 50.0);
    let pw = spec.width - left - right;
    let ph = spec.height - top - bottom;
    let sx = |x: f64| left + (x.log10() - x0) / (x1 - x0) * pw;
    let sy = |y: f64| top + (y1 - y.log10()) / (y1 - y0) * ph;

    let mut svg = String::new();
    writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="12">"#,
        w = spec.width,
        h = spec.height
    )?;
    writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#)?;
    writeln!(
        svg,
        r#"<clipPath id="plot-area"><rect x="{left}" y="{top}" width="{pw}" height="{ph}"/></clipPath>"#
    )?;

    let shade: Vec<_> = chart.shade.iter().filter(|(m, b)| *m > 0.0 && *b > 0.0).collect();
    if shade.len() >= 2 {
        let mut d = format!("M{:.2},{:.2}", sx(shade[0].0), top);
        for (m, b) in &shade {
            write!(d, " L{:.2},{:.2}", sx(*m), sy(*b).min(top + ph))?;
        }
        write!(d, " L{:.2},{:.2} Z", sx(shade[shade.len() - 1].0), top)?;
        writeln!(
            svg,
            r##"<path class="shade" d="{d}" fill="#f4b6c2" fill-opacity="0.5" stroke="none" clip-path="url(#plot-area)"/>"##
        )?;
    }

    // Decade grid and tick labels.
    for e in x0 as i32..=x1 as i32 {
        let x = sx(10f64.powi(e));
        writeln!(svg, r##"<line x1="{x:.2}" y1="{top}" x2="{x:.2}" y2="{}" stroke="#ddd"/>"##, top + ph)?;
        writeln!(svg, r#"<text x="{x:.2}" y="{}" text-anchor="middle">1e{e}</text>"#, top + ph + 18.0)?;
    }
    for e in y0 as i32..=y1 as i32 {
        let y = sy(10f64.powi(e));
        writeln!(svg, r##"<line x1="{left}" y1="{y:.2}" x2="{}" y2="{y:.2}" stroke="#ddd"/>"##, left + pw)?;
        writeln!(svg, r#"<text x="{}" y="{:.2}" text-anchor="end">1e{e}</text>"#, left - 6.0, y + 4.0)?;
    }
    writeln!(
        svg,
        r#"<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
    )?;
    writeln!(
        svg,
        r#"<text x="{}" y="{}" text-anchor="middle">number of PDs M</text>"#,
        left + pw / 2.0,
        spec.height - 10.0
    )?;
    writeln!(
        svg,
        r#"<text x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})">{}</text>"#,
        top + ph / 2.0,
        top + ph / 2.0,
        escape(&chart.y_label)
    )?;
    if let Some(title) = &spec.title {
        writeln!(svg, r#"<text x="{}" y="24" text-anchor="middle" font-size="14">{}</text>"#, left + pw / 2.0, escape(title))?;
    }

    for (i, s) in chart.series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let pts: Vec<String> = s
            .points
            .iter()
            .filter(|(x, y)| *x > 0.0 && *y > 0.0)
            .map(|(x, y)| format!("{:.2},{:.2}", sx(*x), sy(*y)))
            .collect();
        writeln!(
            svg,
            r#"<polyline class="series" data-label="{label}" points="{}" fill="none" stroke="{color}" stroke-width="1.5" clip-path="url(#plot-area)"/>"#,
            pts.join(" "),
            label = escape(&s.label)
        )?;
        let ly = top + 14.0 + 18.0 * i as f64;
        let lx = left + pw + 12.0;
        writeln!(svg, r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/>"#, lx + 20.0)?;
        writeln!(svg, r#"<text x="{}" y="{}">{}</text>"#, lx + 26.0, ly + 4.0, escape(&s.label))?;
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Reads `csv_path` and writes the chart to `svg_path`. Nothing is written
/// unless the whole chart renders.
pub fn render_plot(csv_path: &Path, svg_path: &Path, spec: &PlotSpec) -> Result<()> {
    let text = fs::read_to_string(csv_path).with_context(|| format!("reading {}", csv_path.display()))?;
    let chart = read_chart(&text).with_context(|| format!("plotting {}", csv_path.display()))?;
    let svg = render_svg(&chart, spec)?;
    fs::write(svg_path, svg).with_context(|| format!("writing {}", svg_path.display()))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const BETAMIN: &str = "m,xi,gamma_star_db,gamma_star,beta_min_sq,floor
1,1,10,10,1,0.2
10,1,10,10,0.3,0.2
1,0.5,10,10,1,0.2
10,0.5,10,10,0.5,0.2
";

    #[test]
    fn groups_series_by_regime_and_snr() {
        let chart = read_chart(BETAMIN).unwrap();
        assert_eq!(chart.series.len(), 2);
        assert_eq!(chart.series[0].label, "ξ=1 10 dB");
        assert!(chart.shade.is_empty());
        let svg = render_svg(&chart, &PlotSpec::default()).unwrap();
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert!(!svg.contains("class=\"shade\""));
    }

    #[test]
    fn loss_factor_tables_get_a_band() {
        let csv = "g,m,beam,rho,beta_sq,beta_min_sq,meets_reference
0,1,gaussian,0.1,1,1,true
1,7,gaussian,0.1,0.3,0.06,true
2,19,gaussian,0.1,0.1,0.05,true
";
        let chart = read_chart(csv).unwrap();
        assert_eq!(chart.shade.len(), 3);
        let svg = render_svg(&chart, &PlotSpec::default()).unwrap();
        assert!(svg.contains("class=\"shade\""));
    }

    #[test]
    fn reports_line_of_bad_value() {
        let csv = "m,xi,gamma_star_db,gamma_star,beta_min_sq,floor\n1,1,10,10,1,0.2\n2,1,10,10,oops,0.2\n";
        let err = format!("{:#}", read_chart(csv).unwrap_err());
        assert!(err.contains("line 3"), "{err}");
    }

    #[test]
    fn empty_tables_are_rejected() {
        assert!(read_chart("").is_err());
        assert!(read_chart("m,xi,gamma_star_db,gamma_star,beta_min_sq,floor\n").is_err());
    }
}
