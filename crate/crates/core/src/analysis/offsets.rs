use crate::error::{Error, Result};

/// Signed offset (candidate minus reference) for each reference point.
///
/// Reference points are taken in order; each pairs with the nearest
/// candidate not yet matched, the earlier one on ties. `None` means no
/// candidate was left.
pub fn change_point_offsets(reference: &[usize], candidate: &[usize]) -> Result<Vec<Option<i64>>> {
    for (name, list) in [("reference", reference), ("candidate", candidate)] {
        if list.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::data(format!(
                "{name} change points must be sorted ascending"
            )));
        }
    }
    let mut used = vec![false; candidate.len()];
    Ok(reference
        .iter()
        .map(|&r| {
            let (j, &c) = candidate
                .iter()
                .enumerate()
                .filter(|(j, _)| !used[*j])
                .min_by_key(|(_, &c)| c.abs_diff(r))?;
            used[j] = true;
            Some(c as i64 - r as i64)
        })
        .collect())
}

/// Mean absolute offset over matched points.
pub fn mean_abs_offset(offsets: &[Option<i64>]) -> Option<f64> {
    let matched: Vec<i64> = offsets.iter().flatten().copied().collect();
    if matched.is_empty() {
        return None;
    }
    Some(matched.iter().map(|o| o.unsigned_abs() as f64).sum::<f64>() / matched.len() as f64)
}
