//! Prüfer-style codes for spanning trees of `K_{a,b}`.
//!
//! A tree is encoded by repeatedly deleting the smallest leaf (sources before
//! sinks in the vertex order) and recording its neighbour. Deleted source
//! leaves record a sink and deleted sink leaves record a source, giving a
//! pair of words in `[b]^{a−1} × [a]^{b−1}`; decoding inverts this, so the
//! `a^{b−1}·b^{a−1}` code pairs list every tree exactly once. This is an
//! independent route to the census used only for cross-checking.

/// Decodes `(sink word, source word)` into `(source, sink)` edges.
pub fn decode(a: usize, b: usize, sink_word: &[usize], source_word: &[usize]) -> Vec<(usize, usize)> {
    assert_eq!(sink_word.len() + 1, a, "sink word must have length a - 1");
    assert_eq!(source_word.len() + 1, b, "source word must have length b - 1");
    let n = a + b;
    let mut pending = vec![0usize; n];
    for &j in sink_word {
        pending[a + j] += 1;
    }
    for &i in source_word {
        pending[i] += 1;
    }
    let mut removed = vec![false; n];
    let (mut next_sink, mut next_source) = (0, 0);
    let mut edges = Vec::with_capacity(n - 1);
    for _ in 0..n - 2 {
        let leaf = (0..n)
            .find(|&v| !removed[v] && pending[v] == 0)
            .expect("a tree with at least three vertices has a leaf");
        removed[leaf] = true;
        if leaf < a {
            let j = sink_word[next_sink];
            next_sink += 1;
            pending[a + j] -= 1;
            edges.push((leaf, j));
        } else {
            let i = source_word[next_source];
            next_source += 1;
            pending[i] -= 1;
            edges.push((i, leaf - a));
        }
    }
    let rest: Vec<usize> = (0..n).filter(|&v| !removed[v]).collect();
    debug_assert!(rest.len() == 2 && rest[0] < a && rest[1] >= a);
    edges.push((rest[0], rest[1] - a));
    edges.sort_unstable();
    edges
}

/// Inverse of [`decode`].
pub fn encode(a: usize, b: usize, edges: &[(usize, usize)]) -> (Vec<usize>, Vec<usize>) {
    let n = a + b;
    let mut adj = vec![Vec::new(); n];
    for &(i, j) in edges {
        adj[i].push(a + j);
        adj[a + j].push(i);
    }
    let mut degree: Vec<usize> = adj.iter().map(Vec::len).collect();
    let mut removed = vec![false; n];
    let (mut sink_word, mut source_word) = (Vec::new(), Vec::new());
    for _ in 0..n - 2 {
        let leaf = (0..n)
            .find(|&v| !removed[v] && degree[v] == 1)
            .expect("trees have leaves");
        removed[leaf] = true;
        let nb = *adj[leaf].iter().find(|&&u| !removed[u]).expect("leaf has a neighbour");
        degree[nb] -= 1;
        if leaf < a {
            sink_word.push(nb - a);
        } else {
            source_word.push(nb);
        }
    }
    (sink_word, source_word)
}

fn words(len: usize, alphabet: usize) -> impl Iterator<Item = Vec<usize>> {
    let total = alphabet.pow(len as u32);
    (0..total).map(move |mut code| {
        (0..len)
            .map(|_| {
                let d = code % alphabet;
                code /= alphabet;
                d
            })
            .collect()
    })
}

/// Every spanning tree of `K_{a,b}` as an edge bitmask (bit `i·b + j`),
/// obtained by decoding all code pairs.
pub fn all_tree_masks(a: usize, b: usize) -> Vec<u128> {
    assert!(a >= 1 && b >= 1 && a * b <= 128);
    let sink_words: Vec<Vec<usize>> = words(a - 1, b).collect();
    let mut out = Vec::new();
    for source_word in words(b - 1, a) {
        for sink_word in &sink_words {
            let mask = decode(a, b, sink_word, &source_word)
                .into_iter()
                .fold(0u128, |acc, (i, j)| acc | 1u128 << (i * b + j));
            out.push(mask);
        }
    }
    out
}
