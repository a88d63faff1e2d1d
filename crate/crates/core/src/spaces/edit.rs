use std::fmt;

use serde::{Deserialize, Serialize};

/// Symbol sequence; symbols are bytes.
#[derive(Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct Sequence(pub Vec<u8>);

impl Sequence {
    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl From<&str> for Sequence {
    fn from(s: &str) -> Self {
        Sequence(s.as_bytes().to_vec())
    }
}

impl fmt::Debug for Sequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", String::from_utf8_lossy(&self.0))
    }
}

/// Unit-cost edit distance (insert, delete, substitute) with two DP rows.
pub fn edit_distance(a: &[u8], b: &[u8]) -> usize {
    // Keep the shorter string along the row.
    let (a, b) = if a.len() < b.len() { (b, a) } else { (a, b) };
    if b.is_empty() {
        return a.len();
    }
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0usize; b.len() + 1];
    for (i, &ca) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, &cb) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(ca != cb);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// Edit distance divided by the longer length. Two empty sequences are at
/// distance 0.
pub fn normalized_levenshtein(x: &Sequence, y: &Sequence) -> f64 {
    let longest = x.len().max(y.len());
    if longest == 0 {
        return 0.0;
    }
    edit_distance(&x.0, &y.0) as f64 / longest as f64
}
