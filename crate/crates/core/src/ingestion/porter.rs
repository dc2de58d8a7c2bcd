//! Porter stemmer, original 1980 algorithm, implemented from its published
//! definition. Pinned by hand rather than delegated to a stemming crate:
//! the common crates implement the later revised ("Porter2"/Snowball)
//! algorithm, and stemmer drift silently changes every vocabulary built on
//! top of it.
//!
//! Within each step the longest matching suffix decides which single rule
//! is considered; if that rule's condition fails, the step does nothing.

/// Stem one lowercase ASCII word. Words of length <= 2 and words with
/// non-ASCII-alphabetic characters are returned unchanged.
pub fn stem(word: &str) -> String {
    if word.len() <= 2 || !word.bytes().all(|b| b.is_ascii_lowercase()) {
        return word.to_owned();
    }
    let mut w = word.as_bytes().to_vec();
    step1a(&mut w);
    step1b(&mut w);
    step1c(&mut w);
    step2(&mut w);
    step3(&mut w);
    step4(&mut w);
    step5a(&mut w);
    step5b(&mut w);
    String::from_utf8(w).expect("ascii in, ascii out")
}

/// A letter is a consonant unless it is a, e, i, o, u — or a y preceded by
/// a consonant (initial y counts as a consonant).
fn is_consonant(w: &[u8], i: usize) -> bool {
    match w[i] {
        b'a' | b'e' | b'i' | b'o' | b'u' => false,
        b'y' => i == 0 || !is_consonant(w, i - 1),
        _ => true,
    }
}

/// The measure m of a stem: the number of vowel-to-consonant transitions,
/// i.e. m in the form [C](VC)^m[V].
fn measure(w: &[u8]) -> usize {
    let mut m = 0;
    let mut prev_vowel = false;
    for i in 0..w.len() {
        let consonant = is_consonant(w, i);
        if prev_vowel && consonant {
            m += 1;
        }
        prev_vowel = !consonant;
    }
    m
}

fn has_vowel(w: &[u8]) -> bool {
    (0..w.len()).any(|i| !is_consonant(w, i))
}

/// *d: stem ends with a double consonant.
fn ends_double_consonant(w: &[u8]) -> bool {
    let n = w.len();
    n >= 2 && w[n - 1] == w[n - 2] && is_consonant(w, n - 1)
}

/// *o: stem ends consonant-vowel-consonant where the final consonant is
/// not w, x or y.
fn ends_cvc(w: &[u8]) -> bool {
    let n = w.len();
    n >= 3
        && is_consonant(w, n - 3)
        && !is_consonant(w, n - 2)
        && is_consonant(w, n - 1)
        && !matches!(w[n - 1], b'w' | b'x' | b'y')
}

fn ends_with(w: &[u8], suffix: &[u8]) -> bool {
    w.len() >= suffix.len() && &w[w.len() - suffix.len()..] == suffix
}

/// Replace by the longest matching suffix whose condition holds on the
/// stem. `condition` receives (stem, matched suffix).
fn apply_rule_table(
    w: &mut Vec<u8>,
    rules: &[(&[u8], &[u8])],
    condition: impl Fn(&[u8], &[u8]) -> bool,
) {
    let best = rules
        .iter()
        .filter(|(suffix, _)| ends_with(w, suffix))
        .max_by_key(|(suffix, _)| suffix.len());
    if let Some(&(suffix, replacement)) = best {
        let stem_len = w.len() - suffix.len();
        if condition(&w[..stem_len], suffix) {
            w.truncate(stem_len);
            w.extend_from_slice(replacement);
        }
    }
}

/// SSES → SS, IES → I, SS → SS, S → ε.
fn step1a(w: &mut Vec<u8>) {
    if ends_with(w, b"sses") || ends_with(w, b"ies") {
        w.truncate(w.len() - 2);
    } else if ends_with(w, b"s") && !ends_with(w, b"ss") {
        w.pop();
    }
}

/// (m>0) EED → EE; (*v*) ED → ε; (*v*) ING → ε; plus the AT/BL/IZ,
/// undoubling and +E repairs when ED or ING came off.
fn step1b(w: &mut Vec<u8>) {
    if ends_with(w, b"eed") {
        if measure(&w[..w.len() - 3]) > 0 {
            w.pop();
        }
        return;
    }
    let removed = if ends_with(w, b"ed") && has_vowel(&w[..w.len() - 2]) {
        w.truncate(w.len() - 2);
        true
    } else if ends_with(w, b"ing") && has_vowel(&w[..w.len() - 3]) {
        w.truncate(w.len() - 3);
        true
    } else {
        false
    };
    if !removed {
        return;
    }
    if ends_with(w, b"at") || ends_with(w, b"bl") || ends_with(w, b"iz") {
        w.push(b'e');
    } else if ends_double_consonant(w) && !matches!(w[w.len() - 1], b'l' | b's' | b'z') {
        w.pop();
    } else if measure(w) == 1 && ends_cvc(w) {
        w.push(b'e');
    }
}

/// (*v*) Y → I.
fn step1c(w: &mut Vec<u8>) {
    if ends_with(w, b"y") && has_vowel(&w[..w.len() - 1]) {
        let n = w.len();
        w[n - 1] = b'i';
    }
}

fn step2(w: &mut Vec<u8>) {
    const RULES: &[(&[u8], &[u8])] = &[
        (b"ational", b"ate"),
        (b"tional", b"tion"),
        (b"enci", b"ence"),
        (b"anci", b"ance"),
        (b"izer", b"ize"),
        (b"abli", b"able"),
        (b"alli", b"al"),
        (b"entli", b"ent"),
        (b"eli", b"e"),
        (b"ousli", b"ous"),
        (b"ization", b"ize"),
        (b"ation", b"ate"),
        (b"ator", b"ate"),
        (b"alism", b"al"),
        (b"iveness", b"ive"),
        (b"fulness", b"ful"),
        (b"ousness", b"ous"),
        (b"aliti", b"al"),
        (b"iviti", b"ive"),
        (b"biliti", b"ble"),
    ];
    apply_rule_table(w, RULES, |stem, _| measure(stem) > 0);
}

fn step3(w: &mut Vec<u8>) {
    const RULES: &[(&[u8], &[u8])] = &[
        (b"icate", b"ic"),
        (b"ative", b""),
        (b"alize", b"al"),
        (b"iciti", b"ic"),
        (b"ical", b"ic"),
        (b"ful", b""),
        (b"ness", b""),
    ];
    apply_rule_table(w, RULES, |stem, _| measure(stem) > 0);
}

fn step4(w: &mut Vec<u8>) {
    const RULES: &[(&[u8], &[u8])] = &[
        (b"al", b""),
        (b"ance", b""),
        (b"ence", b""),
        (b"er", b""),
        (b"ic", b""),
        (b"able", b""),
        (b"ible", b""),
        (b"ant", b""),
        (b"ement", b""),
        (b"ment", b""),
        (b"ent", b""),
        (b"ion", b""),
        (b"ou", b""),
        (b"ism", b""),
        (b"ate", b""),
        (b"iti", b""),
        (b"ous", b""),
        (b"ive", b""),
        (b"ize", b""),
    ];
    apply_rule_table(w, RULES, |stem, suffix| {
        measure(stem) > 1
            && (suffix != b"ion" || matches!(stem.last(), Some(b's') | Some(b't')))
    });
}

/// (m>1) E → ε; (m=1 and not *o) E → ε.
fn step5a(w: &mut Vec<u8>) {
    if !ends_with(w, b"e") {
        return;
    }
    let stem = &w[..w.len() - 1];
    let m = measure(stem);
    if m > 1 || (m == 1 && !ends_cvc(stem)) {
        w.pop();
    }
}

/// (m>1 and *d and *L) → single letter.
fn step5b(w: &mut Vec<u8>) {
    if measure(w) > 1 && ends_double_consonant(w) && w.last() == Some(&b'l') {
        w.pop();
    }
}
