//! Log-gamma, regularized incomplete beta and gamma functions, and the F
//! and chi-square tail probabilities built on them.

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

const EPS: f64 = 1e-16;
const TINY: f64 = 1e-300;
const MAX_ITER: usize = 10_000;

/// ln Γ(x) for x > 0.
pub fn ln_gamma(x: f64) -> f64 {
    if x < 0.5 {
        // reflection
        let s = (std::f64::consts::PI * x).sin();
        return (std::f64::consts::PI / s).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut a = LANCZOS[0];
    let t = x + LANCZOS_G + 0.5;
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + a.ln()
}

/// Modified Lentz evaluation of the incomplete beta continued fraction.
fn beta_cf(a: f64, b: f64, x: f64) -> f64 {
    let (qab, qap, qam) = (a + b, a + 1.0, a - 1.0);
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < EPS {
            break;
        }
    }
    h
}

/// Regularized incomplete beta I_x(a, b).
pub fn reg_inc_beta(a: f64, b: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let ln_front = ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + a * x.ln() + b * (1.0 - x).ln();
    if x < (a + 1.0) / (a + b + 2.0) {
        ln_front.exp() * beta_cf(a, b, x) / a
    } else {
        1.0 - ln_front.exp() * beta_cf(b, a, 1.0 - x) / b
    }
}

/// Upper tail 1 − I_x(a, b) without cancellation.
fn reg_inc_beta_upper(a: f64, b: f64, x: f64) -> f64 {
    reg_inc_beta(b, a, 1.0 - x)
}

fn gamma_series(a: f64, x: f64) -> f64 {
    let mut ap = a;
    let mut del = 1.0 / a;
    let mut sum = del;
    for _ in 0..MAX_ITER {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if del.abs() < sum.abs() * EPS {
            break;
        }
    }
    sum * (-x + a * x.ln() - ln_gamma(a)).exp()
}

fn gamma_cf(a: f64, x: f64) -> f64 {
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..MAX_ITER {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < TINY {
            d = TINY;
        }
        c = b + an / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < EPS {
            break;
        }
    }
    (-x + a * x.ln() - ln_gamma(a)).exp() * h
}

/// Regularized lower incomplete gamma P(a, x).
pub fn reg_inc_gamma_lower(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x < a + 1.0 {
        gamma_series(a, x)
    } else {
        1.0 - gamma_cf(a, x)
    }
}

/// Regularized upper incomplete gamma Q(a, x) = 1 − P(a, x).
pub fn reg_inc_gamma_upper(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    if x < a + 1.0 {
        1.0 - gamma_series(a, x)
    } else {
        gamma_cf(a, x)
    }
}

/// P(F > f) for an F(d1, d2) variable.
pub fn f_sf(f: f64, d1: f64, d2: f64) -> f64 {
    if f.is_nan() {
        return f64::NAN;
    }
    if f <= 0.0 {
        return 1.0;
    }
    if f.is_infinite() {
        return 0.0;
    }
    let x = d1 * f / (d1 * f + d2);
    reg_inc_beta_upper(d1 / 2.0, d2 / 2.0, x).clamp(0.0, 1.0)
}

/// P(X > x) for a chi-square variable with `k` degrees of freedom.
pub fn chi2_sf(x: f64, k: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    reg_inc_gamma_upper(k / 2.0, x / 2.0).clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(got: f64, want: f64, rel: f64) {
        let tol = rel * want.abs().max(f64::MIN_POSITIVE);
        assert!((got - want).abs() <= tol, "got {got:e}, want {want:e}");
    }

    // Reference values computed at 50 significant digits.
    #[test]
    fn f_tail_probe_set() {
        let probes = [
            (13.5, 1.0, 4.0, 0.021311641128756725847),
            (1.0, 1.0, 1.0, 0.5),
            (0.5, 3.0, 10.0, 0.69062224553355747161),
            (2.5, 5.0, 20.0, 0.064927046100945159379),
            (177.52, 3.0, 3657.0, 1.8860297466212400848e-107),
            (4.2, 36.0, 3657.0, 1.1411136241203475032e-15),
            (0.01, 2.0, 7.0, 0.99006395053632959768),
            (30.0, 12.0, 40.0, 3.221971246e-16),
            (1.7, 159.0, 3657.0, 2.0262861415121301557e-7),
        ];
        for (f, d1, d2, want) in probes {
            close(f_sf(f, d1, d2), want, 1e-10);
        }
        assert_eq!(f_sf(0.0, 3.0, 4.0), 1.0);
        assert_eq!(f_sf(f64::INFINITY, 3.0, 4.0), 0.0);
    }

    #[test]
    fn chi2_tail_probe_set() {
        let probes = [
            (0.5, 1.0, 0.47950012218695346232),
            (3.84, 1.0, 0.050043521248705103189),
            (10.0, 3.0, 0.018566135463043233303),
            (100.0, 139.0, 0.99478918823409702401),
            (150.0, 120.0, 0.033073480911304668119),
            (2.0, 2.0, 0.3678794411714423216),
            (0.1, 5.0, 0.99983768338807738496),
            (45.0, 20.0, 0.0011034692430283502239),
            (600.0, 500.0, 0.0013774718775282020073),
        ];
        for (x, k, want) in probes {
            close(chi2_sf(x, k), want, 1e-10);
        }
        assert_eq!(chi2_sf(0.0, 4.0), 1.0);
    }

    #[test]
    fn building_blocks() {
        for (x, want) in [
            (0.5, 0.57236494292470008707),
            (2.5, 0.28468287047291915963),
            (10.0, 12.801827480081469611),
            (100.5, 361.43554046777762156),
            (1000.25, 5906.947268271117177),
        ] {
            close(ln_gamma(x), want, 1e-13);
        }
        assert!(ln_gamma(1.0).abs() < 1e-14);
        for (a, b, x, want) in [
            (0.5, 0.5, 0.3, 0.36901011956554537504),
            (2.0, 3.0, 0.4, 0.52480000000000003837),
            (10.0, 2.0, 0.95, 0.89810540885756820544),
            (50.0, 60.0, 0.45, 0.46423529143060362867),
            (1.5, 200.0, 0.01, 0.74123884830600501115),
        ] {
            close(reg_inc_beta(a, b, x), want, 1e-10);
        }
        for (a, x, want) in [
            (0.5, 0.2, 0.47291074313446192633),
            (3.0, 2.5, 0.456186884116670482),
            (10.0, 15.0, 0.93014633930059023231),
            (100.0, 90.0, 0.1582209891864301681),
        ] {
            close(reg_inc_gamma_lower(a, x), want, 1e-10);
            close(reg_inc_gamma_upper(a, x), 1.0 - want, 1e-9);
        }
    }
}
