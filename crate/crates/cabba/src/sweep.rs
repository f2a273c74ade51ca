//! Parallel BER sweep.
//!
//! Batches are simulated in fixed-size waves and folded in batch order, so
//! a point stops at exactly the batch the sequential sweep stops at and the
//! counts are identical whatever the thread count.

use cabba_core::channel::{
    batch_seed, ber_batch, finish_point, point_done, BatchCounts, BerConfig, BerPoint, ChannelError,
};
use rayon::prelude::*;

/// Batches simulated per wave.
pub const WAVE: u64 = 16;

pub fn par_ber_point(cfg: &BerConfig, ebno_db: f64, master_seed: u64, point: usize) -> Result<BerPoint, ChannelError> {
    let mut acc = BatchCounts::default();
    let mut next = 0u64;
    'waves: while !point_done(cfg, &acc) {
        let wave: Vec<BatchCounts> = (next..next + WAVE)
            .into_par_iter()
            .map(|b| ber_batch(cfg, ebno_db, batch_seed(master_seed, point, b)))
            .collect::<Result<_, _>>()?;
        for counts in wave {
            acc += counts;
            next += 1;
            if point_done(cfg, &acc) {
                break 'waves;
            }
        }
    }
    finish_point(cfg, ebno_db, acc)
}

pub fn par_ber_sweep(cfg: &BerConfig, ebno_grid: &[f64], master_seed: u64) -> Result<Vec<BerPoint>, ChannelError> {
    if ebno_grid.is_empty() {
        return Err(ChannelError::EmptyGrid);
    }
    ebno_grid
        .par_iter()
        .enumerate()
        .map(|(i, &e)| par_ber_point(cfg, e, master_seed, i))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use cabba_core::channel::ber_sweep;

    #[test]
    fn parallel_equals_sequential() {
        let cfg = BerConfig {
            min_errors: 30,
            max_bits: 40_000,
            frames_per_batch: 2,
            ..BerConfig::default()
        };
        let grid = [3.0, 7.0, 30.0];
        assert_eq!(par_ber_sweep(&cfg, &grid, 11).unwrap(), ber_sweep(&cfg, &grid, 11).unwrap());
    }
}
