//! Spacetime-diagram SVG emitter: position on the horizontal axis, time
//! going up, parties as labeled world-lines, signals as 45-degree lines.

use std::fmt::Write;

use crate::fixed::Fix;
use crate::geometry::SpatialPoint;
use crate::sim::{EventKind, EventRecord};

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 600.0;
const MARGIN: f64 = 60.0;

fn fmt(v: f64) -> String {
    format!("{v:.3}")
}

/// Renders an event log as a spacetime diagram. `axis` picks the projection
/// coordinate for dimensions above one. Output is deterministic for a given
/// log.
pub fn spacetime_svg(records: &[EventRecord], positions: &[SpatialPoint], axis: usize) -> String {
    let mut out = String::new();
    let _ = write!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" \
         viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n"
    );
    out.push_str("<style>line.sig{stroke:#1f4e9c;stroke-width:1.2} \
         line.world{stroke:#999;stroke-width:0.8;stroke-dasharray:4 3} \
         line.axis{stroke:#000;stroke-width:1.2} \
         circle.ev{fill:#c03030} text{font-family:monospace;font-size:11px}</style>\n");

    let xs: Vec<f64> = positions
        .iter()
        .map(|p| p.get(axis).map(|c| rat_f64(c)).unwrap_or(0.0))
        .collect();
    let times: Vec<Fix> = records.iter().map(|r| r.time).collect();
    if records.is_empty() || positions.is_empty() {
        out.push_str("</svg>\n");
        return out;
    }
    let (tmin, tmax) = times
        .iter()
        .fold((times[0], times[0]), |(lo, hi), &t| (lo.min(t), hi.max(t)));
    let (xmin, xmax) = xs
        .iter()
        .fold((xs[0], xs[0]), |(lo, hi), &x| (lo.min(x), hi.max(x)));
    let xspan = (xmax - xmin).max(1e-9);
    let tspan = (tmax - tmin).to_f64().max(1e-9);
    // Uniform scale on both axes keeps light-speed signals at 45 degrees.
    let scale = ((WIDTH - 2.0 * MARGIN) / xspan).min((HEIGHT - 2.0 * MARGIN) / tspan);
    let px = |x: f64| MARGIN + (x - xmin) * scale;
    let py = |t: Fix| HEIGHT - MARGIN - (t - tmin).to_f64() * scale;

    // Axes.
    let _ = write!(
        out,
        "<line class=\"axis\" x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\"/>\n",
        fmt(MARGIN / 2.0),
        fmt(HEIGHT - MARGIN / 2.0),
        fmt(MARGIN / 2.0),
        fmt(MARGIN / 2.0)
    );
    let _ = write!(
        out,
        "<text x=\"{}\" y=\"{}\">time</text>\n",
        fmt(MARGIN / 2.0 + 4.0),
        fmt(MARGIN / 2.0 + 12.0)
    );
    let _ = write!(
        out,
        "<line class=\"axis\" x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\"/>\n",
        fmt(MARGIN / 2.0),
        fmt(HEIGHT - MARGIN / 2.0),
        fmt(WIDTH - MARGIN / 2.0),
        fmt(HEIGHT - MARGIN / 2.0)
    );
    let _ = write!(
        out,
        "<text x=\"{}\" y=\"{}\">position</text>\n",
        fmt(WIDTH - MARGIN - 30.0),
        fmt(HEIGHT - MARGIN / 2.0 + 14.0)
    );

    // World-lines.
    for (i, &x) in xs.iter().enumerate() {
        let _ = write!(
            out,
            "<line class=\"world\" x1=\"{0}\" y1=\"{1}\" x2=\"{0}\" y2=\"{2}\"/>\n",
            fmt(px(x)),
            fmt(py(tmin)),
            fmt(py(tmax))
        );
        let _ = write!(
            out,
            "<text x=\"{}\" y=\"{}\">P{}</text>\n",
            fmt(px(x) - 8.0),
            fmt(py(tmin) + 16.0),
            i
        );
    }

    // Signal lines: each delivery back to its send event.
    let mut send_index = std::collections::HashMap::new();
    let mut per_sender = std::collections::HashMap::new();
    for r in records {
        if r.kind == EventKind::Send {
            let seq = per_sender.entry(r.party).or_insert(0u64);
            send_index.insert((r.party, *seq), r);
            *seq += 1;
        }
    }
    for r in records {
        if r.kind != EventKind::Deliver {
            continue;
        }
        let Some((sender, seq)) = r.source else { continue };
        let Some(send) = send_index.get(&(sender, seq)) else { continue };
        let _ = write!(
            out,
            "<line class=\"sig\" x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\"/>\n",
            fmt(px(xs[send.party as usize])),
            fmt(py(send.time)),
            fmt(px(xs[r.party as usize])),
            fmt(py(r.time))
        );
        let _ = write!(
            out,
            "<circle class=\"ev\" cx=\"{}\" cy=\"{}\" r=\"2\"/>\n",
            fmt(px(xs[r.party as usize])),
            fmt(py(r.time))
        );
    }
    out.push_str("</svg>\n");
    out
}

fn rat_f64(r: &crate::geometry::Rat) -> f64 {
    let num = r.numer();
    let den = r.denom();
    // Good enough for display: convert through strings only when the parts
    // exceed i64, which plot coordinates never do in bundled scenarios.
    let nf = i64::try_from(num).map(|v| v as f64).unwrap_or(f64::MAX);
    let df = i64::try_from(den).map(|v| v as f64).unwrap_or(1.0);
    nf / df
}
