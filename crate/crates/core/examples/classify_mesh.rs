//! Mesh a square, cut it with a circle and report the interface elements.
//!
//! Usage: `cargo run --release --example classify_mesh -- [N] [radius]`

use ife::geometry::{classify, fictitious_element, ElementClass};
use ife::prelude::*;

fn main() -> Result<()> {
    let args: Vec<String> = std::env::args().collect();
    let n: usize = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(10);
    let r: f64 = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(std::f64::consts::FRAC_PI_4);
    let mesh = build_mesh(n)?;
    let iface = Interface::circle(0.0, 0.0, r)?.flipped();
    let cls = classify(&mesh, &iface)?;
    let count = |c: ElementClass| cls.classes.iter().filter(|&&k| k == c).count();
    println!(
        "N={n} h={} triangles={} interface={} plus={} minus={}",
        mesh.h,
        mesh.num_triangles(),
        count(ElementClass::Interface),
        count(ElementClass::NonInterface(Side::Plus)),
        count(ElementClass::NonInterface(Side::Minus))
    );
    for &t in cls.interface_elements.iter().take(5) {
        let cut = cls.cuts[t].as_ref().unwrap();
        let f = fictitious_element(mesh.triangle_points(t), 1.5, &iface, Some(t))?;
        println!(
            "  T{t}: cut at ({:.4}, {:.4}) and ({:.4}, {:.4}); T_1.5 cut at ({:.4}, {:.4}) and ({:.4}, {:.4})",
            cut.points[0].x, cut.points[0].y, cut.points[1].x, cut.points[1].y,
            f.cut.points[0].x, f.cut.points[0].y, f.cut.points[1].x, f.cut.points[1].y
        );
    }
    Ok(())
}
