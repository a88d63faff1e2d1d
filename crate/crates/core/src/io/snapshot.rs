//! Index snapshots.
//!
//! Layout: magic, little-endian `u32` version, then a length-prefixed
//! bincode header and a length-prefixed bincode payload, and finally the
//! SHA-256 of the payload bytes. The header records the content hash of
//! the data set the index was built over; loading against any other data
//! set is refused.

use std::fs;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::dataset::{DataSet, ObjectId};
use crate::error::{Error, Result};
use crate::index::{
    AnyIndex, BruteForce, MiFileIndex, MiFileSearch, NappIndex, NappSearch, Node, PermFilterIndex,
    PermFilterSearch, PermStorage, Posting, PrunerParams, SwGraph, SwSearch, VpTree,
};
use crate::permutation::PivotSet;
use crate::spaces::{Space, SpaceKind};

pub const SNAPSHOT_MAGIC: [u8; 8] = *b"PKSNAPSH";
pub const SNAPSHOT_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SnapshotHeader {
    pub method: String,
    pub space: SpaceKind,
    pub data_hash: [u8; 32],
    pub num_objects: u64,
    /// Number of pivots; 0 for methods without pivots.
    pub m: usize,
    /// Posting lists per object; 0 when not applicable.
    pub m_i: usize,
    pub seed: Option<u64>,
    pub library_version: String,
}

#[derive(Serialize, Deserialize)]
enum Payload<T> {
    BruteForce,
    PermFilter {
        pivots: PivotSet<T>,
        storage: PermStorage,
        search: PermFilterSearch,
    },
    MiFile {
        pivots: PivotSet<T>,
        m_i: usize,
        postings: Vec<Vec<Posting>>,
        search: MiFileSearch,
    },
    Napp {
        pivots: PivotSet<T>,
        m_i: usize,
        chunk_size: usize,
        postings: Vec<Vec<ObjectId>>,
        search: NappSearch,
    },
    VpTree {
        nodes: Vec<Node>,
        root: Option<u32>,
        buckets: Vec<ObjectId>,
        bucket_size: usize,
        pruner: PrunerParams,
    },
    SwGraph {
        adjacency: Vec<Vec<ObjectId>>,
        nn: usize,
        search: SwSearch,
    },
}

fn snapshot_error(msg: impl Into<String>) -> Error {
    Error::Snapshot(msg.into())
}

pub fn save_snapshot<S: Space>(index: &AnyIndex<S>, path: &Path) -> Result<()> {
    let data = index.data();
    let (payload, m, m_i, seed) = match index {
        AnyIndex::BruteForce(_) => (Payload::BruteForce, 0, 0, None),
        AnyIndex::PermFilter(i, search) => (
            Payload::PermFilter {
                pivots: i.pivots().clone(),
                storage: i.storage().clone(),
                search: *search,
            },
            i.num_pivots(),
            0,
            i.pivots().seed(),
        ),
        AnyIndex::MiFile(i, search) => (
            Payload::MiFile {
                pivots: i.pivots().clone(),
                m_i: i.m_i(),
                postings: i.all_postings().to_vec(),
                search: *search,
            },
            i.num_pivots(),
            i.m_i(),
            i.pivots().seed(),
        ),
        AnyIndex::Napp(i, search) => (
            Payload::Napp {
                pivots: i.pivots().clone(),
                m_i: i.m_i(),
                chunk_size: i.chunk_size(),
                postings: i.all_postings().to_vec(),
                search: *search,
            },
            i.num_pivots(),
            i.m_i(),
            i.pivots().seed(),
        ),
        AnyIndex::VpTree(i, pruner) => {
            let (nodes, root, buckets) = i.parts();
            (
                Payload::VpTree {
                    nodes: nodes.to_vec(),
                    root,
                    buckets: buckets.to_vec(),
                    bucket_size: i.bucket_size(),
                    pruner: *pruner,
                },
                0,
                0,
                None,
            )
        }
        AnyIndex::SwGraph(i, search) => (
            Payload::SwGraph {
                adjacency: i.adjacency().to_vec(),
                nn: i.nn(),
                search: *search,
            },
            0,
            0,
            Some(search.seed),
        ),
    };
    let header = SnapshotHeader {
        method: index.method_name().to_string(),
        space: index.space_kind(),
        data_hash: data.content_hash(),
        num_objects: data.len() as u64,
        m,
        m_i,
        seed,
        library_version: crate::VERSION.to_string(),
    };
    let header_bytes = bincode::serialize(&header).map_err(|e| snapshot_error(e.to_string()))?;
    let payload_bytes = bincode::serialize(&payload).map_err(|e| snapshot_error(e.to_string()))?;
    let mut out = Vec::with_capacity(header_bytes.len() + payload_bytes.len() + 64);
    out.extend_from_slice(&SNAPSHOT_MAGIC);
    out.extend_from_slice(&SNAPSHOT_VERSION.to_le_bytes());
    out.extend_from_slice(&(header_bytes.len() as u64).to_le_bytes());
    out.extend_from_slice(&header_bytes);
    out.extend_from_slice(&(payload_bytes.len() as u64).to_le_bytes());
    out.extend_from_slice(&payload_bytes);
    out.extend_from_slice(&Sha256::digest(&payload_bytes));
    fs::write(path, out)?;
    Ok(())
}

fn in_range(ids: impl IntoIterator<Item = ObjectId>, n: usize) -> bool {
    ids.into_iter().all(|id| (id as usize) < n)
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.bytes.len())
            .ok_or_else(|| snapshot_error("file is truncated"))?;
        let out = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(out)
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}

/// Reads only the header of a snapshot.
pub fn read_snapshot_header(path: &Path) -> Result<SnapshotHeader> {
    let bytes = fs::read(path)?;
    let mut r = Reader { bytes: &bytes, pos: 0 };
    read_header(&mut r)
}

fn read_header(r: &mut Reader<'_>) -> Result<SnapshotHeader> {
    if r.take(SNAPSHOT_MAGIC.len())? != SNAPSHOT_MAGIC {
        return Err(snapshot_error("not an index snapshot (bad magic)"));
    }
    let version = u32::from_le_bytes(r.take(4)?.try_into().unwrap());
    if version != SNAPSHOT_VERSION {
        return Err(snapshot_error(format!(
            "snapshot format version {version} is not supported (expected {SNAPSHOT_VERSION})"
        )));
    }
    let len = r.u64()? as usize;
    bincode::deserialize(r.take(len)?).map_err(|e| snapshot_error(format!("corrupt header: {e}")))
}

/// Restores an index saved by [`save_snapshot`] over `data`, which must be
/// the data set it was built from.
pub fn load_snapshot<S: Space>(path: &Path, space: S, data: Arc<DataSet<S::Object>>) -> Result<AnyIndex<S>> {
    let bytes = fs::read(path)?;
    let mut r = Reader { bytes: &bytes, pos: 0 };
    let header = read_header(&mut r)?;
    let len = r.u64()? as usize;
    let payload_bytes = r.take(len)?;
    let digest = r.take(32)?;
    if r.pos != bytes.len() {
        return Err(snapshot_error("trailing bytes after payload"));
    }
    if Sha256::digest(payload_bytes).as_slice() != digest {
        return Err(snapshot_error("payload checksum mismatch"));
    }
    if header.space != space.kind() {
        return Err(snapshot_error(format!(
            "snapshot was built for space {}, not {}",
            header.space,
            space.kind()
        )));
    }
    if header.num_objects != data.len() as u64 || header.data_hash != data.content_hash() {
        return Err(snapshot_error("data set does not match the one the snapshot was built from"));
    }
    let payload: Payload<S::Object> =
        bincode::deserialize(payload_bytes).map_err(|e| snapshot_error(format!("corrupt payload: {e}")))?;
    let n = data.len();
    let corrupt = || snapshot_error("payload is inconsistent with the data set");
    Ok(match payload {
        Payload::BruteForce => AnyIndex::BruteForce(BruteForce::new(space, data)),
        Payload::PermFilter { pivots, storage, search } => {
            let m = pivots.len();
            let ok = match &storage {
                PermStorage::Full(ranks) => {
                    ranks.len() == n * m && ranks.iter().all(|&r| r >= 1 && r as usize <= m)
                }
                PermStorage::Binary {
                    words_per_object,
                    bits,
                    threshold,
                } => bits.len() == n * words_per_object && (*threshold as usize) <= m,
            };
            if !ok {
                return Err(corrupt());
            }
            AnyIndex::PermFilter(PermFilterIndex::from_parts(space, data, pivots, storage), search)
        }
        Payload::MiFile {
            pivots,
            m_i,
            postings,
            search,
        } => {
            let m = pivots.len();
            let ok = (postings.len() == m || n == 0)
                && m_i <= m.max(postings.len())
                && postings
                    .iter()
                    .all(|l| in_range(l.iter().map(|p| p.id), n) && l.iter().all(|p| (p.position as usize) <= m));
            if !ok {
                return Err(corrupt());
            }
            AnyIndex::MiFile(MiFileIndex::from_parts(space, data, pivots, m_i, postings), search)
        }
        Payload::Napp {
            pivots,
            m_i,
            chunk_size,
            postings,
            search,
        } => {
            let ok = (postings.len() == pivots.len() || n == 0)
                && postings
                    .iter()
                    .all(|l| in_range(l.iter().copied(), n) && l.windows(2).all(|w| w[0] < w[1]));
            if !ok {
                return Err(corrupt());
            }
            AnyIndex::Napp(
                NappIndex::from_postings(space, data, pivots, m_i, chunk_size, postings)?,
                search,
            )
        }
        Payload::VpTree {
            nodes,
            root,
            buckets,
            bucket_size,
            pruner,
        } => {
            let num = nodes.len() as u32;
            let ok = in_range(buckets.iter().copied(), n)
                && root.is_none_or(|r| r < num)
                && nodes.iter().all(|node| match *node {
                    Node::Internal {
                        pivot, left, right, ..
                    } => (pivot as usize) < n && left.is_none_or(|c| c < num) && right.is_none_or(|c| c < num),
                    Node::Leaf { start, end } => start <= end && end as usize <= buckets.len(),
                });
            if !ok {
                return Err(corrupt());
            }
            AnyIndex::VpTree(
                VpTree::from_parts(space, data, nodes, root, buckets, bucket_size),
                pruner,
            )
        }
        Payload::SwGraph { adjacency, nn, search } => {
            if adjacency.len() != n || !adjacency.iter().all(|l| in_range(l.iter().copied(), n)) {
                return Err(corrupt());
            }
            AnyIndex::SwGraph(SwGraph::from_parts(space, data, adjacency, nn), search)
        }
    })
}
