//! Gamma function (Lanczos, g = 7) and exact factorials.

use std::f64::consts::PI;

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

const FACTORIALS: [u64; 21] = [
    1,
    1,
    2,
    6,
    24,
    120,
    720,
    5_040,
    40_320,
    362_880,
    3_628_800,
    39_916_800,
    479_001_600,
    6_227_020_800,
    87_178_291_200,
    1_307_674_368_000,
    20_922_789_888_000,
    355_687_428_096_000,
    6_402_373_705_728_000,
    121_645_100_408_832_000,
    2_432_902_008_176_640_000,
];

pub fn gamma(x: f64) -> f64 {
    if x < 0.5 {
        return PI / ((PI * x).sin() * gamma(1.0 - x));
    }
    if x == x.floor() && x <= 21.0 {
        return factorial(x as u32 - 1);
    }
    let (sum, t, y) = lanczos_parts(x);
    (2.0 * PI).sqrt() * t.powf(y + 0.5) * (-t).exp() * sum
}

/// `ln Γ(x)` for `x > 0`.
pub fn ln_gamma(x: f64) -> f64 {
    if x < 0.5 {
        return (PI / (PI * x).sin()).abs().ln() - ln_gamma(1.0 - x);
    }
    let (sum, t, y) = lanczos_parts(x);
    0.5 * (2.0 * PI).ln() + (y + 0.5) * t.ln() - t + sum.ln()
}

fn lanczos_parts(x: f64) -> (f64, f64, f64) {
    let y = x - 1.0;
    let mut sum = LANCZOS[0];
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        sum += c / (y + i as f64);
    }
    (sum, y + LANCZOS_G + 0.5, y)
}

/// `n!` from the exact integer table for `n ≤ 20`, through Γ beyond.
pub fn factorial(n: u32) -> f64 {
    match FACTORIALS.get(n as usize) {
        Some(v) => *v as f64,
        None => gamma(n as f64 + 1.0),
    }
}

pub fn ln_factorial(n: u32) -> f64 {
    match FACTORIALS.get(n as usize) {
        Some(v) => (*v as f64).ln(),
        None => ln_gamma(n as f64 + 1.0),
    }
}

/// Exact `Γ(k + 1/2) = (2k)! √π / (4^k k!)`, evaluated as a running product.
pub fn gamma_half_integer(k: u32) -> f64 {
    let mut v = PI.sqrt();
    for j in 0..k {
        v *= j as f64 + 0.5;
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_exact_half_integers() {
        for k in 0..15 {
            let x = k as f64 + 0.5;
            let rel = gamma(x) / gamma_half_integer(k) - 1.0;
            assert!(rel.abs() < 1e-13, "k={k} rel={rel:e}");
            let lrel = ln_gamma(x) - gamma_half_integer(k).ln();
            assert!(lrel.abs() < 1e-13 * (1.0 + gamma_half_integer(k).ln().abs()));
        }
        assert!((gamma(1.5) - PI.sqrt() / 2.0).abs() < 1e-15);
    }

    #[test]
    fn matches_factorials_off_the_table_path() {
        for n in 1..=20u32 {
            let (sum, t, y) = lanczos_parts(n as f64 + 1.0);
            let lanczos = (2.0 * PI).sqrt() * t.powf(y + 0.5) * (-t).exp() * sum;
            let rel = lanczos / factorial(n) - 1.0;
            assert!(rel.abs() < 1e-13, "n={n} rel={rel:e}");
        }
        assert_eq!(factorial(0), 1.0);
        assert_eq!(factorial(5), 120.0);
    }

    #[test]
    fn reflection_branch() {
        // Γ(1/4) Γ(3/4) = π √2
        let prod = gamma(0.25) * gamma(0.75);
        assert!((prod / (PI * 2f64.sqrt()) - 1.0).abs() < 1e-13);
    }
}
