//! Quadrature rules on the reference triangle and on edges.

/// 7-point rule exact for polynomials of degree 5: barycentric points and
/// weights normalised to sum to one.
pub fn triangle_rule() -> [([f64; 3], f64); 7] {
    let r15 = 15f64.sqrt();
    let a1 = (9.0 - 2.0 * r15) / 21.0;
    let b1 = (6.0 + r15) / 21.0;
    let w1 = (155.0 + r15) / 1200.0;
    let a2 = (9.0 + 2.0 * r15) / 21.0;
    let b2 = (6.0 - r15) / 21.0;
    let w2 = (155.0 - r15) / 1200.0;
    let c = 1.0 / 3.0;
    [
        ([c, c, c], 9.0 / 40.0),
        ([a1, b1, b1], w1),
        ([b1, a1, b1], w1),
        ([b1, b1, a1], w1),
        ([a2, b2, b2], w2),
        ([b2, a2, b2], w2),
        ([b2, b2, a2], w2),
    ]
}

/// Two-point Gauss rule on [0, 1]: (parameter, weight).
pub fn edge_rule() -> [(f64, f64); 2] {
    let d = 0.5 / 3f64.sqrt();
    [(0.5 - d, 0.5), (0.5 + d, 0.5)]
}

/// Maps barycentric coordinates to a point of the triangle.
pub fn map_point(v: &[[f64; 2]; 3], l: [f64; 3]) -> [f64; 2] {
    [
        l[0] * v[0][0] + l[1] * v[1][0] + l[2] * v[2][0],
        l[0] * v[0][1] + l[1] * v[1][1] + l[2] * v[2][1],
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triangle_rule_integrates_degree_five() {
        // ∫_T λ0^a λ1^b λ2^c = 2|T| a! b! c! / (a+b+c+2)!
        let fact = |n: u32| (1..=n).product::<u32>() as f64;
        for (a, b, c) in [(0, 0, 0), (1, 0, 0), (2, 1, 0), (1, 1, 1), (3, 2, 0), (5, 0, 0), (2, 2, 1)] {
            let q: f64 = triangle_rule()
                .iter()
                .map(|(l, w)| w * l[0].powi(a) * l[1].powi(b) * l[2].powi(c))
                .sum();
            let exact = 2.0 * fact(a as u32) * fact(b as u32) * fact(c as u32)
                / fact((a + b + c + 2) as u32);
            assert!((q - exact).abs() < 1e-14, "{a}{b}{c}: {q} vs {exact}");
        }
    }

    #[test]
    fn edge_rule_integrates_cubics() {
        let q: f64 = edge_rule().iter().map(|(s, w)| w * s.powi(3)).sum();
        assert!((q - 0.25).abs() < 1e-15);
    }
}
