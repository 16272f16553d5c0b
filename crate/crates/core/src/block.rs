/// Selected column indices together with the direction entries carried on
/// them.
///
/// The direction is the sparse vector that equals `values[p]` at
/// `indices[p]` and zero elsewhere. Indices are strictly increasing.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct BlockIndexSet {
    indices: Vec<usize>,
    values: Vec<f64>,
}

impl BlockIndexSet {
    /// Panics if the lengths differ or the indices are not strictly
    /// increasing.
    pub fn new(indices: Vec<usize>, values: Vec<f64>) -> Self {
        assert_eq!(indices.len(), values.len(), "index/value length mismatch");
        assert!(
            indices.windows(2).all(|w| w[0] < w[1]),
            "block indices must be strictly increasing"
        );
        Self { indices, values }
    }

    /// Block carrying `source[j]` at each selected `j`.
    pub fn gather(indices: Vec<usize>, source: &[f64]) -> Self {
        let values = indices.iter().map(|&j| source[j]).collect();
        Self::new(indices, values)
    }

    /// Block whose direction is the unit vector along every index.
    pub fn unit(indices: Vec<usize>) -> Self {
        let values = vec![1.0; indices.len()];
        Self::new(indices, values)
    }

    #[inline]
    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// `η^T v` for a full-length vector `v`.
    pub fn dot_full(&self, v: &[f64]) -> f64 {
        self.indices
            .iter()
            .zip(&self.values)
            .map(|(&j, &e)| e * v[j])
            .sum()
    }

    /// Dense length-`n` copy of the direction vector.
    pub fn to_dense(&self, n: usize) -> Vec<f64> {
        let mut out = vec![0.0; n];
        for (&j, &v) in self.indices.iter().zip(&self.values) {
            out[j] = v;
        }
        out
    }
}
