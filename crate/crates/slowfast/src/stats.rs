//! Small statistics toolbox for the experiment harness: order-fixed pairwise
//! reduction, least squares, and the goodness-of-fit tests used to validate
//! the simulators.

/// Pairwise (tree) summation with a fixed reduction shape: deterministic for a
/// given input order regardless of threading, and more accurate than a naive
/// left fold for large samples.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 32 {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

#[derive(Debug, Clone, Copy)]
pub struct MeanVar {
    pub mean: f64,
    /// Unbiased sample variance.
    pub variance: f64,
    pub n: usize,
}

pub fn mean_var(xs: &[f64]) -> MeanVar {
    let n = xs.len();
    assert!(n > 0, "mean of empty sample");
    let mean = pairwise_sum(xs) / n as f64;
    if n == 1 {
        return MeanVar {
            mean,
            variance: 0.0,
            n,
        };
    }
    let devs: Vec<f64> = xs.iter().map(|x| (x - mean) * (x - mean)).collect();
    MeanVar {
        mean,
        variance: pairwise_sum(&devs) / (n as f64 - 1.0),
        n,
    }
}

#[derive(Debug, Clone, Copy)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

/// Ordinary least squares of `y` on `x`.
pub fn ols(xs: &[f64], ys: &[f64]) -> LineFit {
    assert_eq!(xs.len(), ys.len());
    assert!(xs.len() >= 2, "need at least two points to fit a line");
    let n = xs.len() as f64;
    let mx = pairwise_sum(xs) / n;
    let my = pairwise_sum(ys) / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
        syy += (y - my) * (y - my);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    LineFit {
        slope,
        intercept,
        r2,
    }
}

/// Lanczos approximation of `ln Gamma(x)` for `x > 0` (abs error < 1e-13).
pub fn ln_gamma(x: f64) -> f64 {
    const COEFFS: [f64; 14] = [
        57.156_235_665_862_92,
        -59.597_960_355_475_49,
        14.136_097_974_741_746,
        -0.491_913_816_097_620_2,
        3.399_464_998_481_189e-5,
        4.652_362_892_704_858e-5,
        -9.837_447_530_487_956e-5,
        1.580_887_032_249_125e-4,
        -2.102_644_417_241_049e-4,
        2.174_396_181_152_126e-4,
        -1.643_181_065_367_639e-4,
        8.441_822_398_385_275e-5,
        -2.619_083_840_158_141e-5,
        3.689_918_265_953_162e-6,
    ];
    assert!(x > 0.0, "ln_gamma domain");
    let g = 607.0 / 128.0;
    let mut s = 0.999_999_999_999_997_1;
    for (i, &c) in COEFFS.iter().enumerate() {
        s += c / (x + i as f64 + 1.0);
    }
    let t = x + g + 0.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + s.ln() - x.ln()
}

/// Regularized lower incomplete gamma `P(a, x)`, via the series for
/// `x < a + 1` and the continued fraction otherwise.
pub fn reg_lower_gamma(a: f64, x: f64) -> f64 {
    assert!(a > 0.0 && x >= 0.0, "reg_lower_gamma domain");
    if x == 0.0 {
        return 0.0;
    }
    let ln_pre = a * x.ln() - x - ln_gamma(a);
    if x < a + 1.0 {
        // series: P(a,x) = e^{ln_pre} sum_n x^n / (a (a+1) .. (a+n))
        let mut term = 1.0 / a;
        let mut sum = term;
        let mut ap = a;
        for _ in 0..500 {
            ap += 1.0;
            term *= x / ap;
            sum += term;
            if term.abs() < sum.abs() * 1e-16 {
                break;
            }
        }
        (ln_pre.exp() * sum).min(1.0)
    } else {
        // Lentz continued fraction for Q(a,x)
        let tiny = 1e-300;
        let mut b = x + 1.0 - a;
        let mut c = 1.0 / tiny;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..500 {
            let an = -(i as f64) * (i as f64 - a);
            b += 2.0;
            d = an * d + b;
            if d.abs() < tiny {
                d = tiny;
            }
            c = b + an / c;
            if c.abs() < tiny {
                c = tiny;
            }
            d = 1.0 / d;
            let del = d * c;
            h *= del;
            if (del - 1.0).abs() < 1e-16 {
                break;
            }
        }
        (1.0 - ln_pre.exp() * h).clamp(0.0, 1.0)
    }
}

/// CDF of the chi-squared distribution with `k` degrees of freedom.
pub fn chi2_cdf(x: f64, k: usize) -> f64 {
    reg_lower_gamma(k as f64 / 2.0, x / 2.0)
}

/// Poisson probability mass `P[K = k]` for mean `m`, stable for large `m`.
pub fn poisson_pmf(k: u64, m: f64) -> f64 {
    if m == 0.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    (k as f64 * m.ln() - m - ln_gamma(k as f64 + 1.0)).exp()
}

#[derive(Debug, Clone, Copy)]
pub struct GofResult {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

/// Pearson chi-squared goodness of fit of observed counts against a Poisson
/// law with mean `m`. Cells are pooled from both ends so every expected count
/// is at least 5.
pub fn chi2_gof_poisson(samples: &[u64], m: f64) -> GofResult {
    let n = samples.len() as f64;
    let k_max = *samples.iter().max().expect("empty sample") as usize;
    let mut observed = vec![0.0f64; k_max + 1];
    for &s in samples {
        observed[s as usize] += 1.0;
    }
    let expected: Vec<f64> = (0..=k_max as u64).map(|k| n * poisson_pmf(k, m)).collect();
    // remaining tail mass goes to a final open cell
    let tail_expected = n - expected.iter().sum::<f64>();

    let mut cells: Vec<(f64, f64)> = Vec::new();
    let mut acc_o = 0.0;
    let mut acc_e = 0.0;
    for (o, e) in observed.iter().zip(&expected) {
        acc_o += o;
        acc_e += e;
        if acc_e >= 5.0 {
            cells.push((acc_o, acc_e));
            acc_o = 0.0;
            acc_e = 0.0;
        }
    }
    acc_e += tail_expected.max(0.0);
    if acc_e > 0.0 || acc_o > 0.0 {
        if let Some(last) = cells.last_mut() {
            if acc_e < 5.0 {
                last.0 += acc_o;
                last.1 += acc_e;
            } else {
                cells.push((acc_o, acc_e));
            }
        } else {
            cells.push((acc_o, acc_e));
        }
    }

    let statistic: f64 = cells
        .iter()
        .map(|&(o, e)| (o - e) * (o - e) / e)
        .sum();
    let dof = cells.len().saturating_sub(1).max(1);
    GofResult {
        statistic,
        dof,
        p_value: 1.0 - chi2_cdf(statistic, dof),
    }
}

#[derive(Debug, Clone, Copy)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
}

/// Two-sample Kolmogorov-Smirnov test with the asymptotic p-value.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> KsResult {
    let mut xs = a.to_vec();
    let mut ys = b.to_vec();
    xs.sort_by(|p, q| p.partial_cmp(q).unwrap());
    ys.sort_by(|p, q| p.partial_cmp(q).unwrap());
    let (n, m) = (xs.len(), ys.len());
    let mut i = 0;
    let mut j = 0;
    let mut d = 0.0f64;
    while i < n && j < m {
        let x = xs[i];
        let y = ys[j];
        if x <= y {
            i += 1;
        }
        if y <= x {
            j += 1;
        }
        d = d.max((i as f64 / n as f64 - j as f64 / m as f64).abs());
    }
    let ne = (n as f64 * m as f64) / (n as f64 + m as f64);
    let lambda = (ne.sqrt() + 0.12 + 0.11 / ne.sqrt()) * d;
    // Q_KS(lambda) = 2 sum_j (-1)^{j-1} exp(-2 j^2 lambda^2)
    let mut p = 0.0;
    let mut sign = 1.0;
    for jj in 1..=100 {
        let term = (-2.0 * (jj as f64) * (jj as f64) * lambda * lambda).exp();
        p += 2.0 * sign * term;
        if term < 1e-10 {
            break;
        }
        sign = -sign;
    }
    KsResult {
        statistic: d,
        p_value: p.clamp(0.0, 1.0),
    }
}
