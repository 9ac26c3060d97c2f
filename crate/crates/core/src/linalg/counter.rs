use std::sync::atomic::{AtomicU64, Ordering};

/// Operation counters used to turn per-iteration complexity claims into
/// assertable numbers. Safe to share between threads.
#[derive(Debug, Default)]
pub struct OpCounter {
    factorizations: AtomicU64,
    operator_applies: AtomicU64,
    nnz_touched: AtomicU64,
    max_apply_nnz: AtomicU64,
}

impl OpCounter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn record_factorization(&self) {
        self.factorizations.fetch_add(1, Ordering::Relaxed);
    }

    pub fn record_apply(&self, nnz: u64) {
        self.operator_applies.fetch_add(1, Ordering::Relaxed);
        self.nnz_touched.fetch_add(nnz, Ordering::Relaxed);
        self.max_apply_nnz.fetch_max(nnz, Ordering::Relaxed);
    }

    pub fn factorizations(&self) -> u64 {
        self.factorizations.load(Ordering::Relaxed)
    }

    pub fn operator_applies(&self) -> u64 {
        self.operator_applies.load(Ordering::Relaxed)
    }

    pub fn nnz_touched(&self) -> u64 {
        self.nnz_touched.load(Ordering::Relaxed)
    }

    /// Largest number of stored entries read by a single application.
    pub fn max_nnz_per_apply(&self) -> u64 {
        self.max_apply_nnz.load(Ordering::Relaxed)
    }

    /// Mean number of stored entries read per operator application.
    pub fn nnz_per_apply(&self) -> f64 {
        let applies = self.operator_applies();
        if applies == 0 {
            0.0
        } else {
            self.nnz_touched() as f64 / applies as f64
        }
    }
}
