use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Result, WallError};

/// Site dimensions of a chain split into contiguous left, center and right regions.
///
/// Site 0 is the most significant tensor index. Any of the three regions may be
/// empty, in which case it contributes a factor of one to the total dimension.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SystemLayout {
    site_dims: Vec<usize>,
    left: Range<usize>,
    center: Range<usize>,
    right: Range<usize>,
}

impl SystemLayout {
    /// Builds a layout with the first `n_left` sites in L, the next `n_center` in C
    /// and the remainder in R.
    pub fn new(site_dims: Vec<usize>, n_left: usize, n_center: usize) -> Result<Self> {
        if site_dims.is_empty() {
            return Err(WallError::Layout("no sites".into()));
        }
        if let Some(pos) = site_dims.iter().position(|&q| q == 0) {
            return Err(WallError::Layout(format!("site {pos} has dimension 0")));
        }
        if n_left + n_center > site_dims.len() {
            return Err(WallError::Layout(format!(
                "regions L={n_left}, C={n_center} exceed {} sites",
                site_dims.len()
            )));
        }
        let n = site_dims.len();
        Ok(Self {
            site_dims,
            left: 0..n_left,
            center: n_left..n_left + n_center,
            right: n_left + n_center..n,
        })
    }

    /// Layout from per-region site dimensions.
    pub fn from_regions(left: &[usize], center: &[usize], right: &[usize]) -> Result<Self> {
        let dims: Vec<usize> = left.iter().chain(center).chain(right).copied().collect();
        Self::new(dims, left.len(), center.len())
    }

    /// Three single-site regions.
    pub fn tripartite(dl: usize, dc: usize, dr: usize) -> Self {
        Self::from_regions(&[dl], &[dc], &[dr]).expect("positive dimensions")
    }

    /// A layout whose sites all belong to the center region.
    pub fn flat(site_dims: Vec<usize>) -> Result<Self> {
        let n = site_dims.len();
        Self::new(site_dims, 0, n)
    }

    pub fn site_dims(&self) -> &[usize] {
        &self.site_dims
    }

    pub fn num_sites(&self) -> usize {
        self.site_dims.len()
    }

    pub fn dim(&self) -> usize {
        self.site_dims.iter().product()
    }

    pub fn left_sites(&self) -> Range<usize> {
        self.left.clone()
    }

    pub fn center_sites(&self) -> Range<usize> {
        self.center.clone()
    }

    pub fn right_sites(&self) -> Range<usize> {
        self.right.clone()
    }

    pub fn dim_left(&self) -> usize {
        self.site_dims[self.left.clone()].iter().product()
    }

    pub fn dim_center(&self) -> usize {
        self.site_dims[self.center.clone()].iter().product()
    }

    pub fn dim_right(&self) -> usize {
        self.site_dims[self.right.clone()].iter().product()
    }

    pub fn left_dims(&self) -> &[usize] {
        &self.site_dims[self.left.clone()]
    }

    pub fn center_dims(&self) -> &[usize] {
        &self.site_dims[self.center.clone()]
    }

    pub fn right_dims(&self) -> &[usize] {
        &self.site_dims[self.right.clone()]
    }

    /// Mirror image: sites reversed, L and R exchanged.
    pub fn reversed(&self) -> Self {
        let mut dims = self.site_dims.clone();
        dims.reverse();
        Self::new(dims, self.right.len(), self.center.len()).expect("valid mirror")
    }
}

/// Total dimension of a list of site dimensions.
pub fn total_dim(dims: &[usize]) -> usize {
    dims.iter().product()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn regions_cover_sites() {
        let l = SystemLayout::from_regions(&[2], &[2, 2], &[3]).unwrap();
        assert_eq!(l.dim(), 24);
        assert_eq!(l.dim_left(), 2);
        assert_eq!(l.dim_center(), 4);
        assert_eq!(l.dim_right(), 3);
        assert_eq!(l.center_sites(), 1..3);
        assert_eq!(l.right_sites(), 3..4);
    }

    #[test]
    fn empty_regions_have_unit_dimension() {
        let l = SystemLayout::new(vec![2, 2], 0, 2).unwrap();
        assert_eq!(l.dim_left(), 1);
        assert_eq!(l.dim_right(), 1);
    }

    #[test]
    fn rejects_bad_layouts() {
        assert!(SystemLayout::new(vec![], 0, 0).is_err());
        assert!(SystemLayout::new(vec![2, 0], 1, 1).is_err());
        assert!(SystemLayout::new(vec![2, 2], 2, 1).is_err());
    }

    #[test]
    fn reversal_swaps_flanks() {
        let l = SystemLayout::from_regions(&[2, 3], &[4], &[5]).unwrap();
        let r = l.reversed();
        assert_eq!(r.site_dims(), &[5, 4, 3, 2]);
        assert_eq!(r.dim_left(), 5);
        assert_eq!(r.dim_right(), 6);
    }
}
