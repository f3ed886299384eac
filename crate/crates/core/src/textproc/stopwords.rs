// Requirement modals ("shall", "ska") are included: they occur in nearly
// every requirement and carry no domain content.

pub(super) const EN: &[&str] = &[
    "a", "about", "above", "after", "again", "against", "all", "also", "an", "and", "any", "are",
    "as", "at", "be", "because", "been", "before", "being", "below", "between", "both", "but",
    "by", "can", "could", "did", "do", "does", "doing", "down", "during", "each", "either", "few",
    "for", "from", "further", "had", "has", "have", "having", "he", "her", "here", "hers", "him",
    "his", "how", "i", "if", "in", "into", "is", "it", "its", "itself", "least", "may", "more",
    "most", "must", "no", "nor", "not", "of", "off", "on", "once", "only", "or", "other", "our",
    "out", "over", "own", "same", "shall", "she", "should", "so", "some", "such", "than", "that",
    "the", "their", "them", "then", "there", "these", "they", "this", "those", "through", "to",
    "too", "under", "until", "up", "upon", "very", "was", "we", "were", "what", "when", "where",
    "which", "while", "who", "whom", "why", "will", "with", "within", "without", "would", "you",
    "your",
];

pub(super) const SV: &[&str] = &[
    "alla", "allt", "att", "av", "bli", "blir", "de", "dem", "den", "denna", "deras", "dess",
    "dessa", "det", "detta", "dig", "din", "ditt", "du", "där", "då", "efter", "ej", "eller",
    "en", "er", "ett", "från", "för", "ha", "har", "hon", "hos", "han", "i", "inom", "inte",
    "jag", "kan", "man", "med", "mellan", "men", "mot", "måste", "ni", "nu", "när", "och", "om",
    "oss", "på", "samt", "sig", "sin", "sina", "sitt", "skall", "ska", "som", "så", "till",
    "under", "upp", "ut", "utan", "vara", "var", "vi", "vid", "vilka", "vilken", "än", "är",
    "över",
];
