//! Small quadrature toolkit: Gauss-Legendre nodes, a tanh-sinh rule for
//! endpoint singularities, and the complete elliptic integral E via the
//! arithmetic-geometric mean.

/// Gauss-Legendre nodes and weights on [-1, 1].
///
/// Newton iteration on the Legendre recurrence; nodes are seeded by the
/// Chebyshev approximation and polish to machine precision in a handful of
/// steps for any n used here.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 2);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // p0, p1 walk the three-term recurrence up to degree n
            let mut p0 = 1.0;
            let mut p1 = x;
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() <= 1e-16 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

/// Integrate f over [a, b] with an n-point Gauss-Legendre rule.
pub fn gl_integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, nodes: &[f64], weights: &[f64]) -> f64 {
    let c = 0.5 * (a + b);
    let s = 0.5 * (b - a);
    let mut acc = 0.0;
    for (&x, &w) in nodes.iter().zip(weights) {
        acc += w * f(c + s * x);
    }
    acc * s
}

/// Tanh-sinh quadrature on [a, b]. Levels double until two consecutive
/// answers agree to `rel_tol` or `max_level` is reached.
///
/// Abscissas are formed as c + s*tanh(..), so offsets from the endpoints
/// below machine precision are unreachable; good for bounded integrands with
/// singular derivatives (or log singularities) at the endpoints, not for
/// power blow-ups like x^(-1/2).
pub fn tanh_sinh<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, rel_tol: f64, max_level: u32) -> f64 {
    let c = 0.5 * (a + b);
    let s = 0.5 * (b - a);
    let half_pi = 0.5 * std::f64::consts::PI;
    let eval = |t: f64| -> f64 {
        let u = half_pi * t.sinh();
        let x = u.tanh();
        let w = half_pi * t.cosh() / u.cosh().powi(2);
        // map the abscissa into [a, b]; clamp keeps x strictly inside
        let y = c + s * x;
        if y <= a.min(b) || y >= a.max(b) {
            return 0.0;
        }
        w * f(y)
    };
    let tmax = 3.8; // tanh(pi/2 sinh 3.8) is within 1e-18 of 1
    let mut hstep = 1.0;
    let mut sum = eval(0.0);
    let mut t = hstep;
    while t <= tmax {
        sum += eval(t) + eval(-t);
        t += hstep;
    }
    let mut prev = sum * hstep * s;
    for _ in 0..max_level {
        hstep *= 0.5;
        let mut t = hstep;
        while t <= tmax {
            sum += eval(t) + eval(-t);
            t += 2.0 * hstep;
        }
        let cur = sum * hstep * s;
        if (cur - prev).abs() <= rel_tol * cur.abs().max(1e-300) {
            return cur;
        }
        prev = cur;
    }
    prev
}

/// Complete elliptic integral of the second kind,
/// E(m) = int_0^{pi/2} sqrt(1 - m sin^2 t) dt, parameter m in [0, 1].
pub fn elliptic_e(m: f64) -> f64 {
    assert!((0.0..=1.0).contains(&m), "elliptic parameter out of range: {m}");
    if m == 1.0 {
        return 1.0;
    }
    if m == 0.0 {
        return std::f64::consts::FRAC_PI_2;
    }
    let mut a = 1.0f64;
    let mut b = (1.0 - m).sqrt();
    let mut c2_sum = m; // 2^(n-1) c_n^2 accumulated; c_0^2 = m contributes m/2 * 2^0... kept as sum of 2^n c_{n+1}^2 below
    let mut pow2 = 1.0f64;
    for _ in 0..40 {
        let c = 0.5 * (a - b);
        let an = 0.5 * (a + b);
        b = (a * b).sqrt();
        a = an;
        pow2 *= 2.0;
        c2_sum += pow2 * c * c;
        if c.abs() <= 1e-17 * a {
            break;
        }
    }
    // E = K * (1 - sum_{n>=0} 2^(n-1) c_n^2), K = pi / (2 a_inf)
    let k = std::f64::consts::FRAC_PI_2 / a;
    k * (1.0 - 0.5 * c2_sum)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gl_is_exact_on_matching_polynomials() {
        let (x, w) = gauss_legendre(8);
        // degree 15 is the exactness edge for 8 nodes
        let val = gl_integrate(|t| t.powi(14), -1.0, 1.0, &x, &w);
        assert!((val - 2.0 / 15.0).abs() < 1e-14);
        let val = gl_integrate(|t| 3.0 * t * t + t, 0.0, 2.0, &x, &w);
        assert!((val - 10.0).abs() < 1e-13);
    }

    #[test]
    fn gl_512_matches_a_sharp_analytic_integral() {
        let (x, w) = gauss_legendre(512);
        let val = gl_integrate(|t| (-t).exp(), 0.0, 1.0, &x, &w);
        // 512-term summation rounding, not rule error
        assert!((val - (1.0 - (-1.0f64).exp())).abs() < 5e-15);
    }

    #[test]
    fn tanh_sinh_handles_endpoint_log_and_kinks() {
        let v = tanh_sinh(|x| x.ln(), 0.0, 1.0, 1e-13, 12);
        assert!((v + 1.0).abs() < 1e-12, "got {v}");
        // the shape that actually shows up downstream: a fractional power of
        // a cosine-like factor vanishing at the right endpoint
        let m = 0.999999f64;
        let v = tanh_sinh(
            |t| (1.0 - m * t.sin().powi(2)).sqrt(),
            0.0,
            std::f64::consts::FRAC_PI_2,
            1e-13,
            12,
        );
        let want = elliptic_e(m);
        assert!((v - want).abs() < 1e-12, "got {v} want {want}");
    }

    #[test]
    fn elliptic_e_pins() {
        assert_eq!(elliptic_e(1.0), 1.0);
        assert!((elliptic_e(0.0) - std::f64::consts::FRAC_PI_2).abs() < 1e-16);
        // A&S 17.3: E(m = 1/2)
        assert!((elliptic_e(0.5) - 1.3506438810476755).abs() < 1e-14);
    }

    #[test]
    fn elliptic_e_agrees_with_direct_quadrature() {
        let (x, w) = gauss_legendre(128);
        for &m in &[0.1, 0.37, 0.8, 0.99] {
            let direct = gl_integrate(
                |t| (1.0 - m * t.sin().powi(2)).sqrt(),
                0.0,
                std::f64::consts::FRAC_PI_2,
                &x,
                &w,
            );
            let agm = elliptic_e(m);
            assert!((agm - direct).abs() < 5e-12, "m={m}: agm {agm} vs direct {direct}");
        }
    }
}
