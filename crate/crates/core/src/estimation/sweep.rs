use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::kernels::{AnisotropyForm, KernelFamily};
use crate::objective::Objective;
use crate::sampling::FieldSample;
use crate::{Error, Result};

/// One axis of a sweep grid: `count` evenly spaced points on `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisSpec {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

impl AxisSpec {
    pub fn points(&self) -> Result<Vec<f64>> {
        if self.count == 0 || !(self.lo <= self.hi) || !self.lo.is_finite() || !self.hi.is_finite() {
            return Err(Error::InvalidParameter(format!("invalid axis {{lo: {}, hi: {}, count: {}}}", self.lo, self.hi, self.count)));
        }
        if self.count == 1 {
            return Ok(vec![self.lo]);
        }
        let step = (self.hi - self.lo) / (self.count - 1) as f64;
        Ok((0..self.count).map(|i| if i + 1 == self.count { self.hi } else { self.lo + step * i as f64 }).collect())
    }
}

/// Cartesian product of the axes, first axis varying slowest.
pub fn grid_from_axes(axes: &[AxisSpec]) -> Result<Vec<Vec<f64>>> {
    if axes.is_empty() {
        return Err(Error::Empty("sweep grid has no axes".into()));
    }
    let mut grid = vec![Vec::new()];
    for axis in axes {
        let pts = axis.points()?;
        grid = grid.into_iter().flat_map(|prefix| pts.iter().map(move |p| [prefix.clone(), vec![*p]].concat())).collect();
    }
    Ok(grid)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub theta: Vec<f64>,
    /// `G_n / sqrt(n)`.
    pub value: f64,
}

/// `G_n(Y, theta) / sqrt(n)` at each grid point, in grid order.
pub fn sweep_objective(
    sample: &FieldSample,
    family: &KernelFamily,
    form: AnisotropyForm,
    grid: &[Vec<f64>],
) -> Result<Vec<CurvePoint>> {
    if grid.is_empty() {
        return Err(Error::Empty("sweep grid is empty".into()));
    }
    let objective = Objective::new(&sample.sites, &sample.y, family, form)?;
    let scale = (objective.n() as f64).sqrt();
    grid.iter()
        .map(|theta| Ok(CurvePoint { theta: theta.clone(), value: objective.g_n(theta)? / scale }))
        .collect()
}

/// CSV with header `theta_1,...,theta_m,g_over_sqrt_n`.
pub fn curve_csv_string(curve: &[CurvePoint]) -> String {
    let m = curve.first().map_or(0, |p| p.theta.len());
    let mut out = String::new();
    for k in 1..=m {
        let _ = write!(out, "theta_{k},");
    }
    out.push_str("g_over_sqrt_n\n");
    for p in curve {
        for t in &p.theta {
            let _ = write!(out, "{t:.16e},");
        }
        let _ = writeln!(out, "{:.16e}", p.value);
    }
    out
}

/// Interior local maxima of a sampled curve: places where the sign of the
/// first difference goes from positive to negative. Flat steps carry the
/// previous sign.
pub fn local_maxima_count(values: &[f64]) -> usize {
    let mut count = 0;
    let mut last_sign = 0i8;
    for w in values.windows(2) {
        let s = match w[1].partial_cmp(&w[0]) {
            Some(std::cmp::Ordering::Greater) => 1,
            Some(std::cmp::Ordering::Less) => -1,
            _ => 0,
        };
        if s == 0 {
            continue;
        }
        if last_sign == 1 && s == -1 {
            count += 1;
        }
        last_sign = s;
    }
    count
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn axis_points_hit_endpoints() {
        let p = AxisSpec { lo: 0.1, hi: 15.0, count: 200 }.points().unwrap();
        assert_eq!(p.len(), 200);
        assert_eq!(p[0], 0.1);
        assert_eq!(p[199], 15.0);
        assert_eq!(AxisSpec { lo: 2.0, hi: 3.0, count: 1 }.points().unwrap(), vec![2.0]);
        assert!(AxisSpec { lo: 2.0, hi: 3.0, count: 0 }.points().is_err());
    }

    #[test]
    fn grid_is_row_major() {
        let g = grid_from_axes(&[AxisSpec { lo: 1.0, hi: 2.0, count: 2 }, AxisSpec { lo: 5.0, hi: 7.0, count: 3 }]).unwrap();
        assert_eq!(g, vec![vec![1.0, 5.0], vec![1.0, 6.0], vec![1.0, 7.0], vec![2.0, 5.0], vec![2.0, 6.0], vec![2.0, 7.0]]);
    }

    #[test]
    fn maxima_counting() {
        assert_eq!(local_maxima_count(&[1.0, 2.0, 3.0, 2.0, 1.0]), 1);
        assert_eq!(local_maxima_count(&[1.0, 2.0, 2.0, 1.0]), 1);
        assert_eq!(local_maxima_count(&[1.0, 2.0, 1.0, 2.0, 1.0]), 2);
        assert_eq!(local_maxima_count(&[1.0, 2.0, 3.0]), 0);
        assert_eq!(local_maxima_count(&[0.0; 5]), 0);
    }

    #[test]
    fn csv_header() {
        let s = curve_csv_string(&[CurvePoint { theta: vec![1.0, 2.0], value: 0.5 }]);
        assert!(s.starts_with("theta_1,theta_2,g_over_sqrt_n\n"));
        assert_eq!(s.lines().count(), 2);
    }
}
