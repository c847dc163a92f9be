//! Small numerical helpers shared across modules.

/// Neumaier compensated summation. Summation order is the iteration order,
/// so results are reproducible bit for bit.
#[derive(Debug, Default, Clone, Copy)]
pub struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = CompensatedSum::new();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

pub fn compensated_sum<I: IntoIterator<Item = f64>>(iter: I) -> f64 {
    iter.into_iter().collect::<CompensatedSum>().value()
}

/// Formats a double like C's `%.17g`.
pub fn fmt_g17(x: f64) -> String {
    const PREC: i32 = 17;
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let sci = format!("{:.*e}", (PREC - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent marker");
    let exp: i32 = exp.parse().expect("exponent");
    if !(-4..PREC).contains(&exp) {
        let mantissa = strip_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (PREC - 1 - exp).max(0) as usize;
        strip_zeros(&format!("{:.*}", decimals, x)).to_string()
    }
}

fn strip_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Finite-difference weights for derivatives `0..=max_order` at `x0` on the
/// nodes `xs` (Fornberg's recursion). Returns `weights[order][node]`.
pub fn fd_weights(x0: f64, xs: &[f64], max_order: usize) -> Vec<Vec<f64>> {
    let n = xs.len();
    let mut c = vec![vec![0.0; n]; max_order + 1];
    c[0][0] = 1.0;
    let mut c1 = 1.0;
    let mut c4 = xs[0] - x0;
    for i in 1..n {
        let mn = i.min(max_order);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = xs[i] - x0;
        for j in 0..i {
            let c3 = xs[i] - xs[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c
}

/// Golden-section search for a minimum of `f` on `[a, b]`.
/// Returns `(argmin, min)`.
pub fn golden_section_min<F, E>(mut f: F, mut a: f64, mut b: f64, tol: f64) -> Result<(f64, f64), E>
where
    F: FnMut(f64) -> Result<f64, E>,
{
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    while (b - a).abs() > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d)?;
        }
    }
    Ok(if fc < fd { (c, fc) } else { (d, fd) })
}

/// Bisection for a sign change of `f` on `[a, b]`; `f(a)` and `f(b)` must differ in sign.
pub fn bisect<F: FnMut(f64) -> f64>(mut f: F, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let mut fa = f(a);
    for _ in 0..200 {
        if (b - a).abs() <= tol {
            break;
        }
        let m = 0.5 * (a + b);
        let fm = f(m);
        if fm == 0.0 {
            return m;
        }
        if (fm > 0.0) == (fa > 0.0) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn g17_matches_printf() {
        assert_eq!(fmt_g17(0.1), "0.10000000000000001");
        assert_eq!(fmt_g17(1.0), "1");
        assert_eq!(fmt_g17(-2.5), "-2.5");
        assert_eq!(fmt_g17(1e-5), "1.0000000000000001e-05");
        assert_eq!(fmt_g17(1e20), "1e+20");
        assert_eq!(fmt_g17(123456.0), "123456");
        assert_eq!(fmt_g17(std::f64::consts::PI), "3.1415926535897931");
    }

    #[test]
    fn g17_round_trips() {
        for &x in &[0.1, 1.0 / 3.0, 2.0f64.sqrt(), 6.02e23, -1.5e-300, 0.00012345] {
            assert_eq!(fmt_g17(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn fornberg_central_stencil() {
        let w = fd_weights(0.0, &[-2.0, -1.0, 0.0, 1.0, 2.0], 2);
        let expect1 = [1.0 / 12.0, -2.0 / 3.0, 0.0, 2.0 / 3.0, -1.0 / 12.0];
        let expect2 = [-1.0 / 12.0, 4.0 / 3.0, -5.0 / 2.0, 4.0 / 3.0, -1.0 / 12.0];
        for i in 0..5 {
            assert!((w[1][i] - expect1[i]).abs() < 1e-14);
            assert!((w[2][i] - expect2[i]).abs() < 1e-14);
        }
    }

    #[test]
    fn compensated_beats_naive() {
        let xs = [1e16, 1.0, -1e16, 1.0];
        assert_eq!(compensated_sum(xs), 2.0);
    }

    #[test]
    fn golden_finds_parabola_min() {
        let (x, fx) =
            golden_section_min::<_, ()>(|x| Ok((x - 0.3) * (x - 0.3)), 0.0, 1.0, 1e-10).unwrap();
        assert!((x - 0.3).abs() < 1e-8);
        assert!(fx < 1e-16);
    }
}
