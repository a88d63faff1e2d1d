use std::ops::Index;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::spaces::Space;

/// Object identifier: the position of the object in its [`DataSet`].
pub type ObjectId = u32;

/// Ordered, immutable collection of objects. Ids are positions.
#[derive(Clone, Debug, PartialEq)]
pub struct DataSet<T> {
    objects: Vec<T>,
}

impl<T> DataSet<T> {
    /// Wraps objects without validation.
    pub fn new(objects: Vec<T>) -> Self {
        assert!(
            objects.len() <= ObjectId::MAX as usize,
            "data set exceeds the id range"
        );
        DataSet { objects }
    }

    /// Wraps objects after checking each one against `space`.
    pub fn validated<S>(space: &S, objects: Vec<T>) -> Result<Self>
    where
        S: Space<Object = T>,
    {
        for (id, obj) in objects.iter().enumerate() {
            space
                .validate(obj)
                .map_err(|e| Error::invalid(format!("object {id}: {e}")))?;
        }
        Ok(DataSet::new(objects))
    }

    pub fn len(&self) -> usize {
        self.objects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.objects.is_empty()
    }

    pub fn get(&self, id: usize) -> Option<&T> {
        self.objects.get(id)
    }

    pub fn objects(&self) -> &[T] {
        &self.objects
    }

    pub fn iter(&self) -> std::slice::Iter<'_, T> {
        self.objects.iter()
    }

    pub fn into_objects(self) -> Vec<T> {
        self.objects
    }
}

impl<T: Clone> DataSet<T> {
    /// New data set holding copies of `ids`, renumbered from 0.
    pub fn subset(&self, ids: &[usize]) -> DataSet<T> {
        DataSet::new(ids.iter().map(|&i| self.objects[i].clone()).collect())
    }
}

impl<T: Serialize> DataSet<T> {
    /// SHA-256 over the serialized objects; snapshots record it to refuse
    /// loading against a different data set.
    pub fn content_hash(&self) -> [u8; 32] {
        let mut hasher = Sha256::new();
        hasher.update((self.objects.len() as u64).to_le_bytes());
        for obj in &self.objects {
            let bytes = bincode::serialize(obj).expect("in-memory serialization cannot fail");
            hasher.update((bytes.len() as u64).to_le_bytes());
            hasher.update(&bytes);
        }
        hasher.finalize().into()
    }
}

impl<T> Index<usize> for DataSet<T> {
    type Output = T;

    fn index(&self, id: usize) -> &T {
        &self.objects[id]
    }
}

impl<T> FromIterator<T> for DataSet<T> {
    fn from_iter<I: IntoIterator<Item = T>>(iter: I) -> Self {
        DataSet::new(iter.into_iter().collect())
    }
}

impl<'a, T> IntoIterator for &'a DataSet<T> {
    type Item = &'a T;
    type IntoIter = std::slice::Iter<'a, T>;

    fn into_iter(self) -> Self::IntoIter {
        self.objects.iter()
    }
}
