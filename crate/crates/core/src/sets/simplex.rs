use crate::error::{Error, Result};

/// Euclidean projection onto `{x : x >= 0, sum x = 1}` by sorting and
/// thresholding, `O(p log p)`.
pub fn project_simplex(d: &[f64]) -> Result<Vec<f64>> {
    if d.is_empty() {
        return Err(Error::InvalidParameter("cannot project an empty vector".into()));
    }
    if d.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite);
    }
    let mut sorted = d.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));

    let mut cumulative = 0.0;
    let mut theta = 0.0;
    for (j, &value) in sorted.iter().enumerate() {
        cumulative += value;
        let candidate = (cumulative - 1.0) / (j + 1) as f64;
        if value - candidate > 0.0 {
            theta = candidate;
        } else {
            break;
        }
    }
    Ok(d.iter().map(|&x| (x - theta).max(0.0)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_close(a: &[f64], b: &[f64]) {
        for (x, y) in a.iter().zip(b) {
            assert!((x - y).abs() < 1e-14, "{a:?} vs {b:?}");
        }
    }

    #[test]
    fn feasible_point_is_fixed() {
        assert_close(&project_simplex(&[0.3, 0.7]).unwrap(), &[0.3, 0.7]);
    }

    #[test]
    fn clipped_vertex() {
        assert_close(&project_simplex(&[2.0, 0.0]).unwrap(), &[1.0, 0.0]);
    }

    #[test]
    fn symmetric_inputs_give_barycenter() {
        assert_close(&project_simplex(&[0.0, 0.0]).unwrap(), &[0.5, 0.5]);
        let third = 1.0 / 3.0;
        assert_close(&project_simplex(&[1.0, 1.0, 1.0]).unwrap(), &[third; 3]);
    }

    #[test]
    fn empty_input_is_an_error() {
        assert!(project_simplex(&[]).is_err());
    }

    #[test]
    fn huge_spread_keeps_top_entry() {
        let x = project_simplex(&[1e10, -3.0, 5.0]).unwrap();
        assert_close(&x, &[1.0, 0.0, 0.0]);
    }
}
