mod common;

use common::{demo, golden, num};
use hygrotherm::appio::{self, load_config, load_curve_csv};
use hygrotherm::materials::{MaterialModel, StateSample};

#[test]
fn monotone_cubic_matches_scipy() {
    let mut curves = std::collections::HashMap::new();
    let mut checked = 0;
    for r in golden("pchip_golden.csv") {
        let name = r[0].to_owned();
        let curve = curves
            .entry(name.clone())
            .or_insert_with(|| load_curve_csv(&demo(&format!("materials/{name}.csv"))).unwrap());
        let (x, y, dy) = (num(&r, 1), num(&r, 2), num(&r, 3));
        let (v, d) = curve.eval_with_slope(x).unwrap();
        assert!((v - y).abs() <= 1e-12 * y.abs().max(1e-300) + 1e-15, "{name} at {x}: {v} vs {y}");
        assert!((d - dy).abs() <= 1e-10 * dy.abs().max(1e-300) + 1e-15, "{name}' at {x}: {d} vs {dy}");
        checked += 1;
    }
    assert!(checked > 200);
}

#[test]
fn kunzel_brick_matches_independent_evaluation() {
    let cfg = load_config(&demo("wall.cfg")).unwrap();
    let brick = appio::driver::layer_materials(&cfg).unwrap().remove(0);
    let rows = golden("kunzel_brick_golden.csv");
    assert_eq!(rows.len(), 42);
    for r in rows {
        let s = StateSample::new(num(&r, 0), num(&r, 1));
        let c = brick.evaluate(s).unwrap();
        let got = [c.b[0][0], c.b[0][1], c.b[1][0], c.b[1][1], c.a[0][0], c.a[0][1], c.a[1][0], c.a[1][1]];
        for (k, g) in got.iter().enumerate() {
            let want = num(&r, k + 2);
            assert!(
                (g - want).abs() <= 1e-10 * want.abs(),
                "column {k} at {s}: {g} vs {want}"
            );
        }
    }
}
