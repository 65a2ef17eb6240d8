use crate::error::{Error, Result};
use crate::params::DiffusionParams;
use crate::segroup::AngleGrid;
use crate::stack::LiftedStack;

/// `(D(psi) + Lambda_N psi) / 2` evaluated with periodic finite differences.
///
/// `D_x psi = (sqrt(M) / 2)(psi[x+1] - psi[x-1])`, so the squared directional
/// derivative is a 9-point stencil at spacing 2. Used as the oracle for the
/// spectral path.
pub fn apply_generator_physical(s: &LiftedStack, p: &DiffusionParams) -> Result<LiftedStack> {
    let (m, n) = (s.size(), s.angles());
    if m != p.size || n != p.angles {
        return Err(Error::Dimension(format!(
            "stack is {m}x{m}x{n} but parameters describe {}x{}x{}",
            p.size, p.size, p.angles
        )));
    }
    let beta = p.beta();
    let q = m as f64 / 4.0;
    let at = |y: usize, x: usize, dy: isize, dx: isize, r: usize| {
        let yy = (y as isize + dy).rem_euclid(m as isize) as usize;
        let xx = (x as isize + dx).rem_euclid(m as isize) as usize;
        s.get(yy, xx, r)
    };
    let mut out = vec![0.0; m * m * n];
    for y in 0..m {
        for x in 0..m {
            for r in 0..n {
                let (sn, c) = AngleGrid::Projective.angle(r, n).sin_cos();
                let v = s.get(y, x, r);
                let dxx = q * (at(y, x, 0, 2, r) - 2.0 * v + at(y, x, 0, -2, r));
                let dyy = q * (at(y, x, 2, 0, r) - 2.0 * v + at(y, x, -2, 0, r));
                let dxy = q * (at(y, x, 1, 1, r) - at(y, x, 1, -1, r) - at(y, x, -1, 1, r) + at(y, x, -1, -1, r));
                let spatial = c * c * dxx + 2.0 * c * sn * dxy + sn * sn * dyy;
                let col = s.column(y, x);
                let jump = 0.5 * beta * (col[(r + n - 1) % n] - 2.0 * v + col[(r + 1) % n]);
                out[(y * m + x) * n + r] = 0.5 * (spatial + jump);
            }
        }
    }
    LiftedStack::new(m, n, out)
}
