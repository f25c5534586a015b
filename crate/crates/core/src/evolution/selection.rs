use rand::Rng;

/// Tournament selection returning an index into `fitnesses`.
///
/// Draws `s_size` entrants uniformly with replacement and reduces them in a
/// knockout bracket: entrants are paired in draw order, in each pair the
/// fitter one (the earlier one on equal fitness) wins with probability
/// `s_prob`, and an unpaired entrant advances unopposed.
pub fn tournament_index<R: Rng + ?Sized>(
    fitnesses: &[f64],
    s_size: usize,
    s_prob: f64,
    rng: &mut R,
) -> usize {
    assert!(!fitnesses.is_empty(), "tournament over an empty population");
    let n = fitnesses.len();
    let mut round: Vec<usize> = (0..s_size.max(1)).map(|_| rng.gen_range(0..n)).collect();
    while round.len() > 1 {
        let mut next = Vec::with_capacity(round.len().div_ceil(2));
        for pair in round.chunks(2) {
            match *pair {
                [a, b] => {
                    let (fit, unfit) = if fitnesses[b] > fitnesses[a] {
                        (b, a)
                    } else {
                        (a, b)
                    };
                    next.push(if rng.gen_bool(s_prob) { fit } else { unfit });
                }
                [a] => next.push(a),
                _ => unreachable!(),
            }
        }
        round = next;
    }
    round[0]
}
