use std::cmp::Ordering;

use crate::error::{Error, Result};

/// Largest dimension the Boolean oracles accept.
pub const MAX_BOOLEAN_DIM: usize = 20;

/// Points of `{0,1}^d` packed as bitmasks; bit `j` holds coordinate `j`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BooleanDataset {
    d: usize,
    points: Vec<u32>,
}

impl BooleanDataset {
    pub fn new(d: usize, points: Vec<u32>) -> Result<Self> {
        if d > MAX_BOOLEAN_DIM {
            return Err(Error::DimensionTooLarge {
                d,
                limit: MAX_BOOLEAN_DIM,
            });
        }
        if points.is_empty() {
            return Err(Error::EmptyInput);
        }
        if let Some(p) = points.iter().find(|&&p| p >> d != 0) {
            return Err(Error::InvalidParameter(format!("point {p:#b} has bits above d = {d}")));
        }
        Ok(Self { d, points })
    }

    /// Parses rows of 0/1 values.
    pub fn from_rows(rows: &[Vec<u8>]) -> Result<Self> {
        let d = rows.first().map_or(0, Vec::len);
        let points = rows
            .iter()
            .enumerate()
            .map(|(i, r)| {
                if r.len() != d {
                    return Err(Error::Shape(format!("row {i} has {} coordinates, expected {d}", r.len())));
                }
                r.iter().enumerate().try_fold(0u32, |acc, (j, &b)| match b {
                    0 => Ok(acc),
                    1 => Ok(acc | 1 << j),
                    _ => Err(Error::OutOfDomain {
                        row: i,
                        column: j,
                        reason: format!("{b} is not Boolean"),
                    }),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(d, points)
    }

    /// Parses strings such as `"100"`, first character being coordinate 0.
    pub fn from_strs(rows: &[&str]) -> Result<Self> {
        let parsed: Vec<Vec<u8>> = rows
            .iter()
            .map(|s| s.bytes().map(|b| b.wrapping_sub(b'0')).collect())
            .collect();
        Self::from_rows(&parsed)
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn points(&self) -> &[u32] {
        &self.points
    }

    pub fn has_duplicates(&self) -> bool {
        let mut sorted = self.points.clone();
        sorted.sort_unstable();
        sorted.windows(2).any(|w| w[0] == w[1])
    }

    fn require_member(&self, x: u32) -> Result<()> {
        if self.points.contains(&x) {
            Ok(())
        } else {
            Err(Error::NotAMember)
        }
    }
}

/// Parses a single `"0110"`-style point.
pub fn parse_point(s: &str) -> u32 {
    s.bytes()
        .enumerate()
        .filter(|(_, b)| *b == b'1')
        .fold(0, |acc, (j, _)| acc | 1 << j)
}

/// `Imp(x, T, S)`: all members of `T` agreeing with `x` on the coordinates in `S`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ImpostorSet {
    pub anchor: u32,
    pub coords: u32,
    pub members: Vec<usize>,
}

pub fn impostors(x: u32, data: &BooleanDataset, coords: u32) -> ImpostorSet {
    let members = data
        .points
        .iter()
        .enumerate()
        .filter(|(_, &y)| (x ^ y) & coords == 0)
        .map(|(i, _)| i)
        .collect();
    ImpostorSet {
        anchor: x,
        coords,
        members,
    }
}

fn coords_of(mask: u32) -> Vec<usize> {
    (0..32).filter(|j| mask >> j & 1 == 1).collect()
}

/// Size of the smallest coordinate set that separates `x` from every other point.
pub fn id_length(x: u32, data: &BooleanDataset) -> Result<usize> {
    data.require_member(x)?;
    if data.has_duplicates() {
        return Err(Error::DuplicatePoints);
    }
    let diffs: Vec<u32> = data.points.iter().filter(|&&y| y != x).map(|&y| x ^ y).collect();
    let d = data.d;
    for size in 0..=d {
        let found = (0u32..1 << d)
            .filter(|s| s.count_ones() as usize == size)
            .any(|s| diffs.iter().all(|&diff| diff & s != 0));
        if found {
            return Ok(size);
        }
    }
    // Without duplicates the full coordinate set always separates.
    unreachable!("no ID found for a duplicate-free dataset")
}

/// Optimal partial ID: the coordinate set and the number of impostors left.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartialId {
    pub coords: Vec<usize>,
    pub impostors: u64,
}

impl PartialId {
    /// `|S| + log2 |Imp(x, T, S)|`.
    pub fn length(&self) -> f64 {
        self.coords.len() as f64 + (self.impostors as f64).log2()
    }

    /// The Boolean sparsity of the subcube this ID describes, `2^(d-|S|) / |Imp|`.
    pub fn subcube_sparsity(&self, d: usize) -> CubeSparsity {
        CubeSparsity {
            cube_size: 1 << (d - self.coords.len()),
            count: self.impostors,
        }
    }
}

/// Minimizes `|S| + log2 |Imp(x, T, S)|` over all `S`; ties go to the smaller
/// `|S|`, then the lexicographically smaller sorted coordinate list.
pub fn pid_length_boolean(x: u32, data: &BooleanDataset) -> Result<PartialId> {
    data.require_member(x)?;
    let diffs: Vec<u32> = data.points.iter().map(|&y| x ^ y).collect();
    let mut best: Option<(u64, u32)> = None;
    for s in 0u32..1 << data.d {
        let imp = diffs.iter().filter(|&&diff| diff & s == 0).count() as u64;
        // 2^|S| * |Imp| is monotone in the objective and exact in integers.
        let cost = imp << s.count_ones();
        let better = match best {
            None => true,
            Some((c, b)) => match cost.cmp(&c) {
                Ordering::Less => true,
                Ordering::Greater => false,
                Ordering::Equal => match s.count_ones().cmp(&b.count_ones()) {
                    Ordering::Less => true,
                    Ordering::Greater => false,
                    Ordering::Equal => coords_of(s) < coords_of(b),
                },
            },
        };
        if better {
            best = Some((cost, s));
        }
    }
    let (cost, s) = best.expect("at least the empty set is enumerated");
    Ok(PartialId {
        coords: coords_of(s),
        impostors: cost >> s.count_ones(),
    })
}

/// Exact Boolean sparsity `cube_size / count` of a subcube.
#[derive(Clone, Copy, Debug, Eq)]
pub struct CubeSparsity {
    pub cube_size: u64,
    pub count: u64,
}

impl CubeSparsity {
    pub fn value(&self) -> f64 {
        self.cube_size as f64 / self.count as f64
    }

    pub fn log2(&self) -> f64 {
        (self.cube_size as f64).log2() - (self.count as f64).log2()
    }
}

impl PartialEq for CubeSparsity {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Ord for CubeSparsity {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.cube_size as u128 * other.count as u128).cmp(&(other.cube_size as u128 * self.count as u128))
    }
}

impl PartialOrd for CubeSparsity {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Maximum of `|C| / |C ∩ T|` over all subcubes `C` of `{0,1}^d` containing `x`.
///
/// Counts points per subcube with a superset-sum transform over agreement
/// masks, so it shares no code path with [`pid_length_boolean`].
pub fn max_boolean_subcube_sparsity(x: u32, data: &BooleanDataset) -> Result<CubeSparsity> {
    data.require_member(x)?;
    let d = data.d;
    let full = (1u32 << d) - 1;
    // within[M] starts as the number of points whose agreement set with x is exactly M.
    let mut within = vec![0u64; 1 << d];
    for &y in &data.points {
        within[(!(x ^ y) & full) as usize] += 1;
    }
    // Superset sums: within[S] = number of points agreeing with x on at least S.
    for bit in 0..d {
        for mask in 0..1usize << d {
            if mask >> bit & 1 == 0 {
                within[mask] += within[mask | 1 << bit];
            }
        }
    }
    let best = (0..1usize << d)
        .map(|s| CubeSparsity {
            cube_size: 1 << (d - s.count_ones() as usize),
            count: within[s],
        })
        .max()
        .expect("at least one subcube");
    Ok(best)
}
