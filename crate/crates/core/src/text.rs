//! Token-level string helpers shared by the aligner, evaluator and generator.

/// Edit distance (insertions, deletions, substitutions) between two
/// sequences of comparable items. Runs in O(|a|·|b|) time and O(|b|) space.
pub fn levenshtein<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    if a.is_empty() {
        return b.len();
    }
    if b.is_empty() {
        return a.len();
    }
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0; b.len() + 1];
    for (i, x) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, y) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(x != y);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// Lowercases a token and trims surrounding non-alphanumeric characters.
pub fn normalize_token(token: &str) -> String {
    token
        .trim_matches(|c: char| !c.is_alphanumeric())
        .to_lowercase()
}

/// Similarity in [0, 1] between two tokens after [`normalize_token`]:
/// `1 - levenshtein / max_len` over characters. Tokens that normalize to the
/// empty string are never similar to anything.
pub fn token_similarity(a: &str, b: &str) -> f64 {
    let a: Vec<char> = normalize_token(a).chars().collect();
    let b: Vec<char> = normalize_token(b).chars().collect();
    similarity_chars(&a, &b)
}

pub(crate) fn similarity_chars(a: &[char], b: &[char]) -> f64 {
    let longest = a.len().max(b.len());
    if a.is_empty() || b.is_empty() {
        return 0.0;
    }
    1.0 - levenshtein(a, b) as f64 / longest as f64
}

/// Upper-cases the first letter of every whitespace-separated word and
/// lower-cases the rest.
pub fn title_case(s: &str) -> String {
    s.split_whitespace()
        .map(|word| {
            let mut out = String::with_capacity(word.len());
            let mut seen_letter = false;
            for c in word.chars() {
                if c.is_alphabetic() && !seen_letter {
                    out.extend(c.to_uppercase());
                    seen_letter = true;
                } else {
                    out.extend(c.to_lowercase());
                }
            }
            out
        })
        .collect::<Vec<_>>()
        .join(" ")
}

/// True when `text` contains `word` as a standalone word, case-insensitive.
/// Words are delimited by non-letters or string boundaries.
pub fn contains_word(text: &str, word: &str) -> bool {
    text.split(|c: char| !c.is_alphabetic())
        .any(|w| !w.is_empty() && w.eq_ignore_ascii_case(word))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn levenshtein_small_cases() {
        assert_eq!(levenshtein::<char>(&[], &[]), 0);
        assert_eq!(levenshtein(&["a", "b"], &[]), 2);
        assert_eq!(levenshtein(&["John", "Q", "Smith"], &["John", "Smith", "Esq"]), 2);
        let k: Vec<char> = "kitten".chars().collect();
        let s: Vec<char> = "sitting".chars().collect();
        assert_eq!(levenshtein(&k, &s), 3);
    }

    #[test]
    fn clair_vs_claire() {
        let s = token_similarity("Clair", "Claire");
        assert!((s - (1.0 - 1.0 / 6.0)).abs() < 1e-12);
        assert!(s >= 0.8);
    }

    #[test]
    fn normalization_ignores_case_and_surrounding_punctuation() {
        assert_eq!(normalize_token("Smith,"), "smith");
        assert_eq!(normalize_token("(555)"), "555");
        assert_eq!(normalize_token("123-4567"), "123-4567");
        assert_eq!(normalize_token("&"), "");
        assert_eq!(token_similarity("&", "&"), 0.0);
        assert_eq!(token_similarity("SMITH", "smith."), 1.0);
    }

    #[test]
    fn title_case_words() {
        assert_eq!(title_case("JOHN Q. SMITH"), "John Q. Smith");
        assert_eq!(title_case("(555) 123-4567"), "(555) 123-4567");
        assert_eq!(title_case("jsmith@firm.COM"), "Jsmith@firm.com");
    }

    #[test]
    fn standalone_word() {
        assert!(contains_word("Attorneys for Petitioner", "for"));
        assert!(contains_word("COUNSEL FOR", "for"));
        assert!(contains_word("for", "for"));
        assert!(!contains_word("California", "for"));
        assert!(!contains_word("Fordham Forum", "for"));
        assert!(contains_word("pro-for/x", "for"));
    }
}
