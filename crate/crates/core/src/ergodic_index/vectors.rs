//! Enumeration of strictly increasing `L`-tuples of positive integers.
//!
//! Order: by coordinate sum, then colexicographically (the last coordinate is
//! compared first), so `(2,3)` precedes `(1,4)`. Stage `n` uses the vector
//! `v_j` with `j = 1 + v2(n)`, so `v_j` recurs along `2^{j-1} + i 2^j`.

fn sum_block(l: usize, sum: u64) -> Vec<Vec<u64>> {
    let mut block = Vec::new();
    tuples_with_sum(l, sum, 1, &mut block, &mut Vec::new());
    block.sort_by(|x, y| x.iter().rev().cmp(y.iter().rev()));
    block
}

fn tuples_with_sum(l: usize, sum: u64, min_first: u64, out: &mut Vec<Vec<u64>>, cur: &mut Vec<u64>) {
    if l == 0 {
        if sum == 0 {
            out.push(cur.clone());
        }
        return;
    }
    // Smallest possible remainder after choosing x: (x+1) + ... + (x+l-1).
    let mut x = min_first;
    loop {
        let rest_min = (l as u64 - 1) * x + (l as u64 - 1) * l as u64 / 2;
        if x + rest_min > sum {
            break;
        }
        cur.push(x);
        tuples_with_sum(l - 1, sum - x, x + 1, out, cur);
        cur.pop();
        x += 1;
    }
}

/// The `j`-th vector (1-based) of `V_L`. Panics if `l == 0` or `j == 0`.
pub fn enumerate_vectors(l: u32, j: u64) -> Vec<u64> {
    assert!(l >= 1 && j >= 1, "need L >= 1 and j >= 1");
    let l = l as usize;
    let mut remaining = j;
    let mut sum = (l * (l + 1) / 2) as u64;
    loop {
        let mut block = sum_block(l, sum);
        if (block.len() as u64) >= remaining {
            return block.swap_remove(remaining as usize - 1);
        }
        remaining -= block.len() as u64;
        sum += 1;
    }
}

/// Inverse of [`enumerate_vectors`]; `None` if `v` is not strictly increasing and positive.
pub fn vector_index(v: &[u64]) -> Option<u64> {
    if v.is_empty() || v[0] == 0 || v.windows(2).any(|w| w[0] >= w[1]) {
        return None;
    }
    let l = v.len();
    let target: u64 = v.iter().sum();
    let mut index = 0u64;
    let mut sum = (l * (l + 1) / 2) as u64;
    loop {
        let block = sum_block(l, sum);
        if sum == target {
            let pos = block.iter().position(|t| t == v)?;
            return Some(index + pos as u64 + 1);
        }
        index += block.len() as u64;
        sum += 1;
    }
}

/// `j = 1 + v2(n)` for the stage-`n` vector. Panics if `n == 0`.
pub fn s_index(n: u64) -> u64 {
    assert!(n >= 1, "s(n) needs n >= 1");
    1 + n.trailing_zeros() as u64
}

/// `(j, v_j)` with `s(n) = v_j`.
pub fn s_of(l: u32, n: u64) -> (u64, Vec<u64>) {
    let j = s_index(n);
    (j, enumerate_vectors(l, j))
}

/// Stage `l(i) = 2^{j-1} + (i + n) 2^j`, at which `s` takes the value `v_j` again.
pub fn lemma_stage(n: u64, j: u64, i: u64) -> Option<u64> {
    let pj = 1u64.checked_shl(j as u32)?;
    (i + n).checked_mul(pj)?.checked_add(pj / 2)
}
