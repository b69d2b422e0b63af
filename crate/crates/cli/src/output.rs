use std::fmt::Write as _;
use std::path::Path;
use std::sync::Arc;

use collective_stopping::{constrained_closure_all, BeliefGrid, CertifiedRegion, EquilibriumCertificate, Game, SamplingRegion};
use serde_json::{json, Value};

use crate::error::{CliError, Result};

pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|source| CliError::Io { path: path.display().to_string(), source })
}

pub fn region_value(region: &SamplingRegion) -> Value {
    json!(region.intervals().iter().map(|&(a, b)| [a, b]).collect::<Vec<_>>())
}

/// A region as a JSON array of `[lo, hi]` pairs.
pub fn region_json(region: &SamplingRegion) -> String {
    region_value(region).to_string()
}

/// Inverse of [`region_json`] on the grid the region was written from.
pub fn parse_region_json(text: &str, grid: Arc<BeliefGrid>) -> Result<SamplingRegion> {
    let pairs: Vec<(f64, f64)> = serde_json::from_str(text)?;
    Ok(SamplingRegion::from_intervals(grid, &pairs)?)
}

pub fn certificate_value(cert: &EquilibriumCertificate) -> Value {
    json!({
        "pass": cert.pass,
        "region": region_value(&cert.region),
        "tolerance": cert.tolerance,
        "max_violation": cert.max_violation(),
        "players": cert.players,
        "vacuous": cert.vacuous,
        "edge_warning": cert.edge_warning,
    })
}

/// One row per interval of every region: `id,lo,hi,max_violation`.
pub fn regions_csv(regions: &[CertifiedRegion]) -> String {
    let mut out = String::from("id,lo,hi,max_violation\n");
    for (id, r) in regions.iter().enumerate() {
        let v = r.certificate.max_violation();
        let intervals = r.region.intervals();
        if intervals.is_empty() {
            writeln!(out, "{id},,,{v}").unwrap();
        }
        for (a, b) in intervals {
            writeln!(out, "{id},{a},{b},{v}").unwrap();
        }
    }
    out
}

/// Deviation closures `V_i` for the uniform profile on `region`.
pub fn closures(game: &Game, region: &SamplingRegion) -> Result<Vec<Vec<f64>>> {
    let profile = vec![region.clone(); game.n_players()];
    (0..game.n_players())
        .map(|i| Ok(constrained_closure_all(i, game.net(i), game.rule(), &profile)?))
        .collect()
}

/// Columns `p`, then `u_i, phi_i, net_i, V_i` per player, then `in_region`.
pub fn closures_csv(game: &Game, region: &SamplingRegion) -> Result<String> {
    let v = closures(game, region)?;
    let np = game.n_players();
    let mut out = String::from("p");
    for i in 1..=np {
        write!(out, ",u{i},phi{i},net{i},V{i}").unwrap();
    }
    out.push_str(",in_region\n");
    for (k, p) in game.grid().points().iter().enumerate() {
        write!(out, "{p}").unwrap();
        for (i, vi) in v.iter().enumerate() {
            write!(out, ",{},{},{},{}", game.u(i).value(k), game.phi(i).value(k), game.net(i).value(k), vi[k]).unwrap();
        }
        writeln!(out, ",{}", u8::from(region.contains_index(k))).unwrap();
    }
    Ok(out)
}

const PANEL_W: f64 = 480.0;
const PANEL_H: f64 = 240.0;
const MARGIN: f64 = 30.0;

fn polyline(xs: &[f64], ys: &[f64], sx: impl Fn(f64) -> f64, sy: impl Fn(f64) -> f64) -> String {
    xs.iter().zip(ys).map(|(x, y)| format!("{:.2},{:.2}", sx(*x), sy(*y))).collect::<Vec<_>>().join(" ")
}

/// One panel per player: net payoff, its deviation closure and the shaded region.
pub fn closures_svg(game: &Game, region: &SamplingRegion) -> Result<String> {
    let v = closures(game, region)?;
    let xs = game.grid().points();
    let np = game.n_players();
    let height = np as f64 * (PANEL_H + MARGIN) + MARGIN;
    let mut out = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{height}\" viewBox=\"0 0 {w} {height}\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n",
        w = PANEL_W + 2.0 * MARGIN
    );
    for i in 0..np {
        let net = game.net(i).values();
        let lo = net.iter().chain(&v[i]).copied().fold(f64::INFINITY, f64::min);
        let hi = net.iter().chain(&v[i]).copied().fold(f64::NEG_INFINITY, f64::max);
        let span = (hi - lo).max(1e-12);
        let top = MARGIN + i as f64 * (PANEL_H + MARGIN);
        let sx = |x: f64| MARGIN + x * PANEL_W;
        let sy = |y: f64| top + PANEL_H - (y - lo) / span * PANEL_H;
        writeln!(out, "<g>").unwrap();
        for (a, b) in region.intervals() {
            writeln!(
                out,
                "<rect x=\"{:.2}\" y=\"{top:.2}\" width=\"{:.2}\" height=\"{PANEL_H}\" fill=\"#dde8f5\"/>",
                sx(a),
                sx(b) - sx(a)
            )
            .unwrap();
        }
        writeln!(out, "<rect x=\"{MARGIN}\" y=\"{top:.2}\" width=\"{PANEL_W}\" height=\"{PANEL_H}\" fill=\"none\" stroke=\"#999\"/>").unwrap();
        writeln!(out, "<polyline fill=\"none\" stroke=\"#444\" stroke-width=\"1.5\" points=\"{}\"/>", polyline(xs, net, sx, sy)).unwrap();
        writeln!(
            out,
            "<polyline fill=\"none\" stroke=\"#1f5fa8\" stroke-width=\"1\" stroke-dasharray=\"4 3\" points=\"{}\"/>",
            polyline(xs, &v[i], sx, sy)
        )
        .unwrap();
        // equilibrium chords over each component
        for (a, b) in region.interval_indices_list() {
            writeln!(
                out,
                "<line x1=\"{:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"#c0392b\" stroke-width=\"1.5\"/>",
                sx(xs[a]),
                sy(net[a]),
                sx(xs[b]),
                sy(net[b])
            )
            .unwrap();
        }
        writeln!(out, "<text x=\"{}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"12\">player {}</text>", MARGIN + 4.0, top + 14.0, i + 1)
            .unwrap();
        writeln!(out, "</g>").unwrap();
    }
    out.push_str("</svg>\n");
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn region_json_round_trip() {
        let grid = Arc::new(BeliefGrid::build(64, 1e-3, &[0.2, 0.4, 0.6, 0.9], &[]).unwrap());
        let r = SamplingRegion::from_intervals(grid.clone(), &[(0.2, 0.4), (0.6, 0.9)]).unwrap();
        let text = region_json(&r);
        assert_eq!(parse_region_json(&text, grid.clone()).unwrap(), r);
        let empty = SamplingRegion::empty(grid.clone());
        assert_eq!(region_json(&empty), "[]");
        assert_eq!(parse_region_json("[]", grid).unwrap(), empty);
    }
}
