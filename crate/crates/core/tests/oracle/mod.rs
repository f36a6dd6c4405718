//! Brute-force BLEU and SARI written from the metric definitions, sharing no
//! code with the library. Counters are plain vectors scanned linearly.

#![allow(dead_code)]

type Gram = Vec<u8>;

/// Every contiguous n-gram, with repetition, in order.
fn grams(tokens: &[u8], n: usize) -> Vec<Gram> {
    if tokens.len() < n {
        return Vec::new();
    }
    (0..=tokens.len() - n).map(|i| tokens[i..i + n].to_vec()).collect()
}

fn count(list: &[Gram], g: &Gram) -> usize {
    list.iter().filter(|x| *x == g).count()
}

fn distinct(list: &[Gram]) -> Vec<Gram> {
    let mut out: Vec<Gram> = Vec::new();
    for g in list {
        if !out.contains(g) {
            out.push(g.clone());
        }
    }
    out
}

/// BLEU-4 over a corpus. Clipped matches and totals are summed across items;
/// each item's effective reference length is the closest one (shorter on
/// ties). Orders without any hypothesis n-gram are left out of the geometric
/// mean, which still divides by four.
pub fn bleu(hyps: &[Vec<u8>], refsets: &[Vec<Vec<u8>>]) -> f64 {
    let mut matches = [0usize; 4];
    let mut totals = [0usize; 4];
    let (mut c, mut r) = (0usize, 0usize);
    for (h, refs) in hyps.iter().zip(refsets) {
        c += h.len();
        let mut best = refs[0].len();
        for x in refs {
            let (d, bd) = (x.len().abs_diff(h.len()), best.abs_diff(h.len()));
            if d < bd || (d == bd && x.len() < best) {
                best = x.len();
            }
        }
        r += best;
        for n in 1..=4 {
            let hg = grams(h, n);
            totals[n - 1] += hg.len();
            for g in distinct(&hg) {
                let max_ref = refs.iter().map(|x| count(&grams(x, n), &g)).max().unwrap_or(0);
                matches[n - 1] += count(&hg, &g).min(max_ref);
            }
        }
    }
    let mut log_p = 0.0;
    for n in 0..4 {
        if totals[n] == 0 {
            continue;
        }
        if matches[n] == 0 {
            return 0.0;
        }
        log_p += (matches[n] as f64 / totals[n] as f64).ln();
    }
    let bp = if c == 0 {
        if r == 0 {
            1.0
        } else {
            0.0
        }
    } else if c < r {
        (1.0 - r as f64 / c as f64).exp()
    } else {
        1.0
    };
    100.0 * bp * (log_p / 4.0).exp()
}

fn f1(p: f64, r: f64) -> f64 {
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

/// Sentence SARI in the original formulation: source and output counts are
/// replicated by the number of references, reference counts are summed, keep
/// and add are F1 scores, delete is a precision. An empty denominator gives 1.
pub fn sentence_sari(src: &[u8], hyp: &[u8], refs: &[Vec<u8>]) -> f64 {
    let k = refs.len();
    let (mut keep_total, mut del_total, mut add_total) = (0.0, 0.0, 0.0);
    for n in 1..=4 {
        let s = grams(src, n);
        let h = grams(hyp, n);
        let rs: Vec<Gram> = refs.iter().flat_map(|x| grams(x, n)).collect();
        let s_rep = |g: &Gram| count(&s, g) * k;
        let h_rep = |g: &Gram| count(&h, g) * k;
        let r_cnt = |g: &Gram| count(&rs, g);

        // keep: grams both in source and output
        let mut p_terms = Vec::new();
        let mut r_terms = Vec::new();
        for g in distinct(&s) {
            let kept = s_rep(&g).min(h_rep(&g));
            let good = kept.min(r_cnt(&g));
            if kept > 0 {
                p_terms.push(good as f64 / kept as f64);
            }
            let all = s_rep(&g).min(r_cnt(&g));
            if all > 0 {
                r_terms.push(good as f64 / all as f64);
            }
        }
        let avg = |v: &[f64]| if v.is_empty() { 1.0 } else { v.iter().sum::<f64>() / v.len() as f64 };
        keep_total += f1(avg(&p_terms), avg(&r_terms));

        // delete: source grams the output dropped
        let mut d_terms = Vec::new();
        for g in distinct(&s) {
            let deleted = s_rep(&g).saturating_sub(h_rep(&g));
            if deleted > 0 {
                let good = deleted.saturating_sub(r_cnt(&g));
                d_terms.push(good as f64 / deleted as f64);
            }
        }
        del_total += avg(&d_terms);

        // add: output grams absent from the source, as sets
        let added: Vec<Gram> = distinct(&h).into_iter().filter(|g| count(&s, g) == 0).collect();
        let possible: Vec<Gram> = distinct(&rs).into_iter().filter(|g| count(&s, g) == 0).collect();
        let good = added.iter().filter(|g| r_cnt(g) > 0).count();
        let p = if added.is_empty() { 1.0 } else { good as f64 / added.len() as f64 };
        let r = if possible.is_empty() { 1.0 } else { good as f64 / possible.len() as f64 };
        add_total += f1(p, r);
    }
    100.0 * (keep_total / 4.0 + del_total / 4.0 + add_total / 4.0) / 3.0
}

/// Every sequence over `0..alphabet` of length `0..=max_len`.
pub fn all_sequences(alphabet: u8, max_len: usize) -> Vec<Vec<u8>> {
    let mut out = vec![Vec::new()];
    let mut frontier = vec![Vec::new()];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for s in &frontier {
            for a in 0..alphabet {
                let mut t: Vec<u8> = s.clone();
                t.push(a);
                next.push(t);
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}
