//! Classical fixed-step fourth-order Runge–Kutta.

use crate::scalar::{lit, Real};

/// One RK4 step of `y' = f(y)` for an autonomous system of size `N`.
pub fn rk4_step<T: Real, const N: usize, F>(f: &F, y: &[T; N], h: T) -> [T; N]
where
    F: Fn(&[T; N]) -> [T; N],
{
    let half = h / lit(2.0);
    let k1 = f(y);
    let k2 = f(&axpy(y, half, &k1));
    let k3 = f(&axpy(y, half, &k2));
    let k4 = f(&axpy(y, h, &k3));
    let sixth = h / lit(6.0);
    let mut out = *y;
    for i in 0..N {
        out[i] = y[i] + sixth * (k1[i] + lit::<T>(2.0) * (k2[i] + k3[i]) + k4[i]);
    }
    out
}

fn axpy<T: Real, const N: usize>(y: &[T; N], a: T, k: &[T; N]) -> [T; N] {
    let mut out = *y;
    for i in 0..N {
        out[i] = y[i] + a * k[i];
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_oscillator_energy_drift_is_small() {
        let f = |y: &[f64; 2]| [y[1], -y[0]];
        let mut y = [1.0, 0.0];
        let h = 1e-3;
        for _ in 0..(std::f64::consts::TAU / h) as usize {
            y = rk4_step(&f, &y, h);
        }
        assert!(((y[0] * y[0] + y[1] * y[1]) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn fourth_order_convergence() {
        let f = |y: &[f64; 1]| [y[0]];
        let err = |n: usize| {
            let h = 1.0 / n as f64;
            let mut y = [1.0];
            for _ in 0..n {
                y = rk4_step(&f, &y, h);
            }
            (y[0] - std::f64::consts::E).abs()
        };
        let ratio = err(20) / err(40);
        assert!(ratio > 14.0 && ratio < 18.0, "ratio {ratio}");
    }
}
