//! CSV renderings of the JSON artifacts written by `verify`.

use std::fmt::Write;

use grushin_core::modulus::DensityRecord;
use grushin_core::qc::QuasisymmetryProfile;
use grushin_core::verify::CurveExport;
use grushin_core::Polyline;

pub fn density(r: &DensityRecord) -> anyhow::Result<String> {
    if r.values.len() != r.nx * r.ny {
        anyhow::bail!("density has {} values for a {}x{} grid", r.values.len(), r.nx, r.ny);
    }
    let hx = (r.bbox.x_max - r.bbox.x_min) / r.nx as f64;
    let hy = (r.bbox.y_max - r.bbox.y_min) / r.ny as f64;
    let mut s = String::from("i,j,x1,x2,value\n");
    for j in 0..r.ny {
        for i in 0..r.nx {
            let x = r.bbox.x_min + (i as f64 + 0.5) * hx;
            let y = r.bbox.y_min + (j as f64 + 0.5) * hy;
            writeln!(s, "{i},{j},{x},{y},{}", r.values[j * r.nx + i])?;
        }
    }
    Ok(s)
}

pub fn curve(c: &CurveExport) -> anyhow::Result<String> {
    // Re-validate: deserialization does not go through the constructor.
    let p = Polyline::new(c.polyline.vertices().to_vec(), c.polyline.params().to_vec())?;
    let mut s = String::from("param,x1,x2\n");
    for (t, v) in p.params().iter().zip(p.vertices()) {
        writeln!(s, "{t},{},{}", v.x, v.y)?;
    }
    Ok(s)
}

/// One row per non-empty bin, `t` at the geometric midpoint of the bin.
pub fn profile(p: &QuasisymmetryProfile) -> anyhow::Result<String> {
    let mut s = String::from("t,envelope\n");
    for b in &p.bins {
        if let Some(e) = b.envelope {
            writeln!(s, "{},{e}", (b.t_lo * b.t_hi).sqrt())?;
        }
    }
    Ok(s)
}
