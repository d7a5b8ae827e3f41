use super::sample::{Jump, SamplePath};
use crate::error::{Error, Result};

/// Removes the jumps larger than `a` in absolute value.
///
/// Returns `X0_t = X_t - sum_{s <= t} dX_s 1{|dX_s| > a}` (same grid, model and
/// seed as the input, so it can be rebuilt with [`recombine`]) and the removed
/// jumps in time order.
pub fn split_jumps(path: &SamplePath, a: f64) -> Result<(SamplePath, Vec<Jump>)> {
    if !(a > 0.0) {
        return Err(Error::invalid(format!("jump threshold must be positive, got {a}")));
    }
    let (big, small): (Vec<Jump>, Vec<Jump>) = path.jumps().iter().partition(|j| j.size.abs() > a);
    if big.is_empty() {
        return Ok((path.clone(), big));
    }
    let mut values = Vec::with_capacity(path.len());
    let mut pre = Vec::with_capacity(path.len());
    let mut removed = 0.0;
    let mut next = big.iter().peekable();
    for i in 0..path.len() {
        let before = removed;
        if next.peek().is_some_and(|j| j.index == i) {
            removed += next.next().unwrap().size;
        }
        values.push(path.values()[i] - removed);
        // a removed jump leaves no left limit behind; a kept one keeps its own
        pre.push(if before != removed { path.values()[i] - removed } else { path.pre_values()[i] - removed });
    }
    Ok((path.with_trajectory(values, pre, small), big))
}

/// Adds `jumps` back onto `continuous`. Inverse of [`split_jumps`].
pub fn recombine(continuous: &SamplePath, jumps: &[Jump]) -> Result<SamplePath> {
    if jumps.windows(2).any(|w| w[1].index <= w[0].index) {
        return Err(Error::invalid("jumps to re-add must be in strictly increasing index order"));
    }
    if let Some(j) = jumps.iter().find(|j| j.index == 0 || j.index >= continuous.len() || continuous.times()[j.index] != j.time) {
        return Err(Error::invalid(format!("jump at index {} does not fit the path grid", j.index)));
    }
    let mut values = Vec::with_capacity(continuous.len());
    let mut pre = Vec::with_capacity(continuous.len());
    let mut added = 0.0;
    let mut next = jumps.iter().peekable();
    for i in 0..continuous.len() {
        let before = added;
        if next.peek().is_some_and(|j| j.index == i) {
            added += next.next().unwrap().size;
        }
        values.push(continuous.values()[i] + added);
        pre.push(continuous.pre_values()[i] + before);
    }
    let mut all: Vec<Jump> = continuous.jumps().iter().chain(jumps).copied().collect();
    all.sort_by_key(|j| j.index);
    if all.windows(2).any(|w| w[1].index == w[0].index) {
        return Err(Error::invalid("re-added jump collides with a jump already on the path"));
    }
    Ok(continuous.with_trajectory(values, pre, all))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::path::{simulate, JumpLaw, PathModel};

    #[test]
    fn no_jumps_is_identity() {
        let p = simulate(&PathModel::standard_brownian(), 64, 1.0, 2).unwrap();
        let (c, big) = split_jumps(&p, 0.5).unwrap();
        assert_eq!(c, p);
        assert!(big.is_empty());
    }

    #[test]
    fn single_jump_is_removed() {
        let times = vec![0.0, 0.25, 0.5, 0.75, 1.0];
        let values = vec![0.0, 0.125, 2.125, 2.25, 2.0];
        let p = SamplePath::from_values(times, values, &[(2, 2.0)]).unwrap();
        let (c, big) = split_jumps(&p, 1.0).unwrap();
        assert_eq!(big.len(), 1);
        assert_eq!((big[0].time, big[0].size), (0.5, 2.0));
        assert!(c.jumps().is_empty());
        assert_eq!(c.values()[2], c.pre_values()[2]);
        assert_eq!(c.values()[2], 0.125);
        assert_eq!(recombine(&c, &big).unwrap(), p);
    }

    #[test]
    fn jump_diffusion_roundtrip_is_bit_exact() {
        let m = PathModel::JumpDiffusion {
            sigma: 1.0,
            drift: 0.3,
            rate: 30.0,
            jump_law: JumpLaw::Normal { mean: 0.0, std: 0.3 },
            start: 1.0 / 3.0,
        };
        for seed in 0..50 {
            let p = simulate(&m, 512, 1.0, seed).unwrap();
            let (c, big) = split_jumps(&p, 0.1).unwrap();
            assert!(c.jumps().iter().all(|j| j.size.abs() <= 0.1));
            assert!(big.iter().all(|j| j.size.abs() > 0.1));
            assert_eq!(recombine(&c, &big).unwrap(), p, "seed {seed}");
        }
    }

    #[test]
    fn bad_threshold() {
        let p = simulate(&PathModel::standard_brownian(), 4, 1.0, 0).unwrap();
        assert!(split_jumps(&p, 0.0).is_err());
    }
}
