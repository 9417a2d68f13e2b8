//! Stage I draws keyed by dataset digest and sampler settings.

use std::collections::{HashMap, VecDeque};
use std::sync::{Arc, Mutex};

use sha2::{Digest, Sha256};

use routerisk_core::ingest::RegionalDataset;
use routerisk_core::logit::PosteriorDraws;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Stage1Key {
    pub dataset_digest: String,
    prior_sd_bits: u64,
    pub iterations: usize,
    pub burn_in: usize,
    pub seed: u64,
}

impl Stage1Key {
    pub fn new(dataset_digest: String, prior_sd: f64, iterations: usize, burn_in: usize, seed: u64) -> Self {
        Self {
            dataset_digest,
            prior_sd_bits: prior_sd.to_bits(),
            iterations,
            burn_in,
            seed,
        }
    }
}

/// Hex SHA-256 of the dataset's canonical CSV form.
pub fn dataset_digest(data: &RegionalDataset) -> String {
    hex::encode(Sha256::digest(data.to_csv().as_bytes()))
}

type Entries = (HashMap<Stage1Key, Arc<PosteriorDraws>>, VecDeque<Stage1Key>);

#[derive(Debug)]
pub struct Stage1Cache {
    capacity: usize,
    inner: Mutex<Entries>,
}

impl Stage1Cache {
    pub fn new(capacity: usize) -> Self {
        Self {
            capacity: capacity.max(1),
            inner: Mutex::new((HashMap::new(), VecDeque::new())),
        }
    }

    pub fn get(&self, key: &Stage1Key) -> Option<Arc<PosteriorDraws>> {
        self.inner.lock().unwrap_or_else(|e| e.into_inner()).0.get(key).cloned()
    }

    /// Oldest entries are evicted first.
    pub fn insert(&self, key: Stage1Key, draws: Arc<PosteriorDraws>) {
        let mut guard = self.inner.lock().unwrap_or_else(|e| e.into_inner());
        let (map, order) = &mut *guard;
        if map.insert(key.clone(), draws).is_none() {
            order.push_back(key);
        }
        while map.len() > self.capacity {
            match order.pop_front() {
                Some(old) => {
                    map.remove(&old);
                }
                None => break,
            }
        }
    }

    pub fn len(&self) -> usize {
        self.inner.lock().unwrap_or_else(|e| e.into_inner()).0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl Default for Stage1Cache {
    fn default() -> Self {
        Self::new(16)
    }
}
