//! Top-k selection with lowest-index tie-breaking.

use std::cmp::Ordering;

use crate::scalar::Scalar;

/// Descending by value, ascending by index. A total order on finite inputs.
#[inline]
fn rank<T: Scalar>(values: &[T], a: usize, b: usize) -> Ordering {
    values[b]
        .partial_cmp(&values[a])
        .unwrap_or(Ordering::Equal)
        .then(a.cmp(&b))
}

/// Indices of the `k` largest entries, sorted ascending.
///
/// Uses `select_nth_unstable_by` (expected `O(n)`), so no full sort happens
/// unless `k` is close to `n`. `scratch` is reused between calls.
pub fn top_k_indices_into<T: Scalar>(values: &[T], k: usize, scratch: &mut Vec<usize>) {
    let n = values.len();
    let k = k.min(n);
    scratch.clear();
    scratch.extend(0..n);
    if k == 0 {
        scratch.clear();
        return;
    }
    if k < n {
        scratch.select_nth_unstable_by(k - 1, |&a, &b| rank(values, a, b));
        scratch.truncate(k);
    }
    scratch.sort_unstable();
}

pub fn top_k_indices<T: Scalar>(values: &[T], k: usize) -> Vec<usize> {
    let mut out = Vec::with_capacity(values.len());
    top_k_indices_into(values, k, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn examples() {
        assert_eq!(top_k_indices(&[3.0, 1.0, 2.0, 5.0], 2), vec![0, 3]);
        assert_eq!(top_k_indices(&[1.0, 1.0, 1.0], 2), vec![0, 1]);
        assert_eq!(top_k_indices(&[-1.0, -2.0, -3.0], 1), vec![0]);
        assert_eq!(top_k_indices(&[0.5f32, 0.5, 0.5], 3), vec![0, 1, 2]);
        assert!(top_k_indices(&[1.0], 0).is_empty());
    }

    proptest! {
        #[test]
        fn matches_stable_sort(values in proptest::collection::vec(-5i32..5, 1..60), k in 0usize..70) {
            let v: Vec<f64> = values.iter().map(|&x| x as f64).collect();
            let mut order: Vec<usize> = (0..v.len()).collect();
            order.sort_by(|&a, &b| rank(&v, a, b));
            let mut expected: Vec<usize> = order.into_iter().take(k).collect();
            expected.sort_unstable();
            prop_assert_eq!(top_k_indices(&v, k), expected);
        }
    }
}
