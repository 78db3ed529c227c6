//! Stem plots of pulse trains: `seq_<N>.svg` and a text-art twin
//! `seq_<N>.stem.txt`. Output depends only on the record, so identical
//! records give identical bytes.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use sfq_core::{Pulse, PulseSequence};

use crate::error::CliError;
use crate::record::RunRecord;
use crate::sweep::write_atomic;

const STEP: f64 = 6.0;
const MARGIN: f64 = 40.0;
const HALF_HEIGHT: f64 = 40.0;

/// Tick marks every `n` ticks, chosen so labels stay readable.
fn label_every(len: usize) -> usize {
    [1, 5, 10, 25, 50, 100, 250, 500]
        .into_iter()
        .find(|&n| len / n <= 12)
        .unwrap_or(1000)
}

/// SVG stem plot of `train`; the x axis is labelled in ns.
pub fn svg(train: &PulseSequence, tick_ns: f64, title: &str) -> String {
    let len = train.len();
    let width = 2.0 * MARGIN + STEP * len.saturating_sub(1) as f64;
    let height = 2.0 * MARGIN + 2.0 * HALF_HEIGHT + 20.0;
    let y0 = MARGIN + HALF_HEIGHT;
    let x = |k: usize| MARGIN + STEP * k as f64;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.1}" height="{height:.1}" viewBox="0 0 {width:.1} {height:.1}" font-family="sans-serif" font-size="10">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{MARGIN:.1}" y="16">{}</text>"#, escape(title));
    let _ = writeln!(
        s,
        r#"<line x1="{:.1}" y1="{y0:.1}" x2="{:.1}" y2="{y0:.1}" stroke="gray"/>"#,
        x(0),
        x(len - 1)
    );
    for (label, v) in [("+1", -1.0), ("-1", 1.0)] {
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{label}</text>"#,
            MARGIN - 8.0,
            y0 + v * HALF_HEIGHT + 3.0
        );
    }
    for (k, p) in train.symbols().iter().enumerate() {
        let y = y0 - p.value() as f64 * HALF_HEIGHT;
        if *p != Pulse::Zero {
            let colour = if *p == Pulse::Positive { "#1f5fa8" } else { "#b23a2e" };
            let _ = writeln!(
                s,
                r#"<line x1="{0:.1}" y1="{y0:.1}" x2="{0:.1}" y2="{y:.1}" stroke="{colour}"/>"#,
                x(k)
            );
        }
        let _ = writeln!(s, r#"<circle cx="{:.1}" cy="{y:.1}" r="1.8"/>"#, x(k));
    }
    let every = label_every(len);
    let base = y0 + HALF_HEIGHT + 16.0;
    for k in (0..len).step_by(every) {
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{base:.1}" text-anchor="middle">{:.2}</text>"#,
            x(k),
            k as f64 * tick_ns
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">t, ns</text>"#,
        width / 2.0,
        base + 16.0
    );
    s.push_str("</svg>\n");
    s
}

fn escape(t: &str) -> String {
    t.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Three-row text plot: `|` above the axis for +1, below for −1.
pub fn text_art(train: &PulseSequence, title: &str) -> String {
    let row = |want: Pulse, mark: char| -> String {
        train
            .symbols()
            .iter()
            .map(|&p| if p == want { mark } else { ' ' })
            .collect::<String>()
            .trim_end()
            .to_string()
    };
    let axis: String = train
        .symbols()
        .iter()
        .map(|&p| if p == Pulse::Zero { '-' } else { 'o' })
        .collect();
    format!(
        "{title}\n+1 {}\n 0 {axis}\n-1 {}\n",
        row(Pulse::Positive, '|'),
        row(Pulse::Negative, '|')
    )
}

fn title(r: &RunRecord) -> String {
    let mut t = format!("N = {}, f0 = {} GHz, {} ticks, {:.2} ns", r.index, r.f0, r.sequence_length, r.duration_ns);
    if let Some(rep) = r.repetition {
        let _ = write!(t, " ({} x {})", rep.subsequence_length, rep.repetitions);
    }
    t
}

/// Writes one SVG and one text-art file per record, named by record index.
pub fn emit_plot(records: &[RunRecord], dir: &Path, tick_ns: f64) -> Result<Vec<PathBuf>, CliError> {
    let mut written = Vec::with_capacity(2 * records.len());
    for r in records {
        let train = r.full_train();
        let t = title(r);
        let svg_path = dir.join(format!("seq_{}.svg", r.index));
        write_atomic(&svg_path, svg(&train, tick_ns, &t).as_bytes())?;
        let txt_path = dir.join(format!("seq_{}.stem.txt", r.index));
        write_atomic(&txt_path, text_art(&train, &t).as_bytes())?;
        written.push(svg_path);
        written.push(txt_path);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_stems() {
        let train: PulseSequence = "+0-".parse().unwrap();
        let art = text_art(&train, "t");
        assert_eq!(art, "t\n+1 |\n 0 o-o\n-1   |\n");
        let s = svg(&train, 0.04, "t");
        assert_eq!(s.matches("<circle").count(), 3);
        // stems only for the two pulses
        assert_eq!(s.matches("stroke=\"#").count(), 2);
        assert!(s.contains(r#"cx="40.0" cy="40.0""#));
        assert!(s.contains(r#"cx="46.0" cy="80.0""#));
        assert!(s.contains(r#"cx="52.0" cy="120.0""#));
    }

    #[test]
    fn title_is_escaped() {
        let train: PulseSequence = "+".parse().unwrap();
        assert!(svg(&train, 0.04, "a<b").contains("a&lt;b"));
    }
}
