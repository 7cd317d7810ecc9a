use crate::scalar::Scalar;

use super::GroupError;

/// Within-class scatter below this fraction of the points' summed squared
/// norms is rounding noise and counts as zero.
pub const WITHIN_SCATTER_FLOOR: f64 = 1e-20;

/// Within- and between-class scatter of a two-class feature set.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Scatter<T> {
    pub within: T,
    pub between: T,
}

impl<T: Scalar> Scatter<T> {
    /// `between / within`; `None` when the within-class scatter vanishes.
    pub fn ratio(&self) -> Option<T> {
        (self.within > T::zero()).then(|| self.between / self.within)
    }
}

fn class_mean<T: Scalar>(points: &[Vec<T>], dim: usize) -> Vec<T> {
    let n = T::from_count(points.len());
    let mut m = vec![T::zero(); dim];
    for p in points {
        for (mi, v) in m.iter_mut().zip(p) {
            *mi = *mi + *v;
        }
    }
    m.iter_mut().for_each(|v| *v = *v / n);
    m
}

fn dist_sq<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(x, y)| (*x - *y) * (*x - *y)).sum()
}

/// Scatter of two equally weighted classes. The overall mean is the mean of
/// the two class means.
pub fn scatter<T: Scalar>(class_u: &[Vec<T>], class_b: &[Vec<T>]) -> Result<Scatter<T>, GroupError> {
    if class_u.is_empty() || class_b.is_empty() {
        return Err(GroupError::TooFewPoints(class_u.len() + class_b.len()));
    }
    let dim = class_u[0].len();
    if class_u.iter().chain(class_b).any(|p| p.len() != dim) {
        return Err(GroupError::DimensionMismatch);
    }
    let mu = class_mean(class_u, dim);
    let mb = class_mean(class_b, dim);
    let half = T::lit(0.5);
    let overall: Vec<T> = mu.iter().zip(&mb).map(|(a, b)| (*a + *b) * half).collect();

    let mut within =
        class_u.iter().map(|p| dist_sq(p, &mu)).sum::<T>() + class_b.iter().map(|p| dist_sq(p, &mb)).sum::<T>();
    let magnitude: T = class_u.iter().chain(class_b).flat_map(|p| p.iter().map(|v| *v * *v)).sum();
    if within <= T::lit(WITHIN_SCATTER_FLOOR) * magnitude {
        within = T::zero();
    }
    let between =
        T::from_count(class_u.len()) * dist_sq(&mu, &overall) + T::from_count(class_b.len()) * dist_sq(&mb, &overall);
    Ok(Scatter { within, between })
}

/// Fisher-style separability `S_B / S_W` of the braced and unbraced features.
pub fn separability<T: Scalar>(class_u: &[Vec<T>], class_b: &[Vec<T>]) -> Result<T, GroupError> {
    scatter(class_u, class_b)?.ratio().ok_or(GroupError::DegenerateWithinScatter)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_classes_score_zero() {
        let u: Vec<Vec<f64>> = (0..7).map(|i| vec![i as f64, (i * i) as f64, 1.0]).collect();
        assert_eq!(separability(&u, &u.clone()).unwrap(), 0.0);
    }

    #[test]
    fn collapsed_classes_are_degenerate() {
        let u = vec![vec![0.0, 0.0]; 7];
        let b = vec![vec![3.0, 4.0]; 7];
        let s = scatter(&u, &b).unwrap();
        assert_eq!(s.within, 0.0);
        // 7 * 2.5^2 per class.
        assert_eq!(s.between, 2.0 * 7.0 * 6.25);
        assert_eq!(separability(&u, &b), Err(GroupError::DegenerateWithinScatter));
    }

    #[test]
    fn rounding_residue_is_degenerate() {
        // Seven copies of a value whose mean does not round-trip exactly.
        let u = vec![vec![-726.6689134704809, 1729.8840293824198, 0.1]; 7];
        let b = vec![vec![803.4241675000502, -607.8353482752548, 0.3]; 7];
        assert_eq!(scatter(&u, &b).unwrap().within, 0.0);
        let mut spread = u.clone();
        spread[0][2] += 1e-6;
        assert!(separability(&spread, &b).unwrap() > 0.0);
    }

    #[test]
    fn dimension_checks() {
        assert_eq!(separability(&[vec![1.0]], &[vec![1.0, 2.0]]), Err(GroupError::DimensionMismatch));
        assert!(separability::<f64>(&[], &[vec![1.0]]).is_err());
    }
}
