use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::dataset::DataSet;
use crate::error::Result;
use crate::index::{
    AccumulatorMetric, BruteForce, Gamma, MiFileIndex, MiFileParams, MiFileSearch, NappIndex,
    NappParams, NappSearch, PermDistance, PermFilterIndex, PermFilterParams, PermFilterSearch,
    PermMode, PrunerParams, SwGraph, SwGraphParams, SwSearch, VpTree, VpTreeParams,
    DEFAULT_BUCKET_SIZE, DEFAULT_CHUNK_SIZE,
};
use crate::result::QueryResult;
use crate::spaces::Space;

/// Build and query parameters of one search method.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "kebab-case")]
pub enum MethodConfig {
    BruteForce,
    PermFilter {
        m: usize,
        mode: PermMode,
        gamma: Gamma,
        /// Defaults to Spearman for full permutations, Hamming when binarized.
        distance: Option<PermDistance>,
    },
    MiFile {
        m: usize,
        m_i: usize,
        m_s: usize,
        max_position_diff: Option<usize>,
        gamma: Gamma,
        metric: AccumulatorMetric,
    },
    Napp {
        m: usize,
        m_i: usize,
        t: usize,
        gamma: Option<Gamma>,
        chunk_size: usize,
    },
    VpTree {
        bucket_size: usize,
        pruner: PrunerParams,
    },
    SwGraph {
        nn: usize,
        build_attempts: usize,
        search_attempts: usize,
    },
}

impl MethodConfig {
    pub fn name(&self) -> &'static str {
        match self {
            MethodConfig::BruteForce => "brute-force",
            MethodConfig::PermFilter { .. } => "permfilter",
            MethodConfig::MiFile { .. } => "mifile",
            MethodConfig::Napp { .. } => "napp",
            MethodConfig::VpTree { .. } => "vptree",
            MethodConfig::SwGraph { .. } => "swgraph",
        }
    }

    pub const NAMES: [&'static str; 6] = ["brute-force", "permfilter", "mifile", "napp", "vptree", "swgraph"];

    /// Configuration with the default parameters of the named method.
    pub fn default_for(name: &str) -> Option<MethodConfig> {
        Some(match name {
            "brute-force" => MethodConfig::BruteForce,
            "permfilter" => MethodConfig::PermFilter {
                m: 128,
                mode: PermMode::Full,
                gamma: Gamma::Fraction(0.02),
                distance: None,
            },
            "mifile" => MethodConfig::MiFile {
                m: 128,
                m_i: 32,
                m_s: 32,
                max_position_diff: None,
                gamma: Gamma::Fraction(0.02),
                metric: AccumulatorMetric::Footrule,
            },
            "napp" => MethodConfig::Napp {
                m: 512,
                m_i: 32,
                t: 2,
                gamma: None,
                chunk_size: DEFAULT_CHUNK_SIZE,
            },
            "vptree" => MethodConfig::VpTree {
                bucket_size: DEFAULT_BUCKET_SIZE,
                pruner: PrunerParams::metric(),
            },
            "swgraph" => MethodConfig::SwGraph {
                nn: 10,
                build_attempts: 2,
                search_attempts: 10,
            },
            _ => return None,
        })
    }
}

/// A built index of any kind together with its query parameters.
#[derive(Debug)]
pub enum AnyIndex<S: Space> {
    BruteForce(BruteForce<S>),
    PermFilter(PermFilterIndex<S>, PermFilterSearch),
    MiFile(MiFileIndex<S>, MiFileSearch),
    Napp(NappIndex<S>, NappSearch),
    VpTree(VpTree<S>, PrunerParams),
    SwGraph(SwGraph<S>, SwSearch),
}

impl<S: Space> AnyIndex<S> {
    pub fn build(
        config: &MethodConfig,
        space: S,
        data: Arc<DataSet<S::Object>>,
        seed: u64,
        threads: usize,
    ) -> Result<Self> {
        Ok(match *config {
            MethodConfig::BruteForce => AnyIndex::BruteForce(BruteForce::new(space, data)),
            MethodConfig::PermFilter {
                m,
                mode,
                gamma,
                distance,
            } => {
                let index = PermFilterIndex::build(space, data, &PermFilterParams { m, mode, seed, threads })?;
                let mut search = index.default_search(gamma);
                if let Some(d) = distance {
                    search.distance = d;
                }
                AnyIndex::PermFilter(index, search)
            }
            MethodConfig::MiFile {
                m,
                m_i,
                m_s,
                max_position_diff,
                gamma,
                metric,
            } => AnyIndex::MiFile(
                MiFileIndex::build(space, data, &MiFileParams { m, m_i, seed, threads })?,
                MiFileSearch {
                    m_s,
                    max_position_diff,
                    gamma,
                    metric,
                },
            ),
            MethodConfig::Napp {
                m,
                m_i,
                t,
                gamma,
                chunk_size,
            } => AnyIndex::Napp(
                NappIndex::build(
                    space,
                    data,
                    &NappParams {
                        m,
                        m_i,
                        chunk_size,
                        seed,
                        threads,
                    },
                )?,
                NappSearch { t, gamma },
            ),
            MethodConfig::VpTree { bucket_size, pruner } => {
                pruner.validate()?;
                AnyIndex::VpTree(VpTree::build(space, data, &VpTreeParams { bucket_size, seed })?, pruner)
            }
            MethodConfig::SwGraph {
                nn,
                build_attempts,
                search_attempts,
            } => AnyIndex::SwGraph(
                SwGraph::build(
                    space,
                    data,
                    &SwGraphParams {
                        nn,
                        attempts: build_attempts,
                        seed,
                    },
                )?,
                SwSearch {
                    attempts: search_attempts,
                    seed,
                },
            ),
        })
    }

    pub fn search(&self, query: &S::Object, k: usize) -> Result<QueryResult> {
        match self {
            AnyIndex::BruteForce(i) => i.search(query, k),
            AnyIndex::PermFilter(i, p) => i.search(query, k, p),
            AnyIndex::MiFile(i, p) => i.search(query, k, p),
            AnyIndex::Napp(i, p) => i.search(query, k, p),
            AnyIndex::VpTree(i, p) => i.search(query, k, p),
            AnyIndex::SwGraph(i, p) => i.search(query, k, p),
        }
    }

    pub fn data(&self) -> &Arc<DataSet<S::Object>> {
        match self {
            AnyIndex::BruteForce(i) => i.data(),
            AnyIndex::PermFilter(i, _) => i.data(),
            AnyIndex::MiFile(i, _) => i.data(),
            AnyIndex::Napp(i, _) => i.data(),
            AnyIndex::VpTree(i, _) => i.data(),
            AnyIndex::SwGraph(i, _) => i.data(),
        }
    }

    /// Index structure size in bytes, excluding the data itself.
    pub fn index_bytes(&self) -> usize {
        match self {
            AnyIndex::BruteForce(_) => 0,
            AnyIndex::PermFilter(i, _) => i.index_bytes(),
            AnyIndex::MiFile(i, _) => i.index_bytes(),
            AnyIndex::Napp(i, _) => i.index_bytes(),
            AnyIndex::VpTree(i, _) => i.index_bytes(),
            AnyIndex::SwGraph(i, _) => i.index_bytes(),
        }
    }

    pub fn space_kind(&self) -> crate::spaces::SpaceKind {
        match self {
            AnyIndex::BruteForce(i) => i.space().kind(),
            AnyIndex::PermFilter(i, _) => i.space().kind(),
            AnyIndex::MiFile(i, _) => i.space().kind(),
            AnyIndex::Napp(i, _) => i.space().kind(),
            AnyIndex::VpTree(i, _) => i.space().kind(),
            AnyIndex::SwGraph(i, _) => i.space().kind(),
        }
    }

    pub fn method_name(&self) -> &'static str {
        match self {
            AnyIndex::BruteForce(_) => "brute-force",
            AnyIndex::PermFilter(..) => "permfilter",
            AnyIndex::MiFile(..) => "mifile",
            AnyIndex::Napp(..) => "napp",
            AnyIndex::VpTree(..) => "vptree",
            AnyIndex::SwGraph(..) => "swgraph",
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_name_has_defaults() {
        for name in MethodConfig::NAMES {
            let cfg = MethodConfig::default_for(name).unwrap();
            assert_eq!(cfg.name(), name);
            let json = serde_json::to_string(&cfg).unwrap();
            let back: MethodConfig = serde_json::from_str(&json).unwrap();
            assert_eq!(back, cfg);
        }
        assert!(MethodConfig::default_for("lsh").is_none());
    }
}
