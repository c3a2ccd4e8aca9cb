//! Shallow componentization of extracted event sentences, steered by the
//! backend's pattern label. Splits are heuristic: anything the splitter
//! cannot place cleanly degrades to a coarser split with a warning, never an
//! error.

use std::sync::LazyLock;

use crate::ast::{Comparator, ComponentKind, EventComponent, EventPattern};

/// Common regulation verbs for locating the action inside a sentence;
/// supplemented by an inflection-suffix fallback.
static VERBS: LazyLock<std::collections::BTreeSet<&'static str>> = LazyLock::new(|| {
    [
        "include", "includes", "included", "contain", "contains", "contained", "exceed",
        "exceeds", "approve", "approves", "approved", "deny", "denies", "denied", "require",
        "requires", "required", "wash", "washes", "wear", "wears", "submit", "submits",
        "disclose", "discloses", "sell", "sells", "sold", "file", "files", "filed", "grant",
        "grants", "granted", "sound", "sounds", "conduct", "conducts", "obtain", "obtains",
        "ensure", "ensures", "review", "reviews", "report", "reports", "store", "stores",
        "display", "displays", "provide", "provides", "maintain", "maintains", "keep",
        "keeps", "use", "uses", "used", "check", "checks", "verify", "verifies", "remain",
        "remains", "apply", "applies", "applied",
    ]
    .into_iter()
    .collect()
});

const MODALS: &[&str] = &[
    "shall", "must", "should", "may", "can", "cannot", "will", "not", "be", "is", "are",
];

fn is_lexicon_verb(token: &str) -> bool {
    VERBS.contains(token.to_lowercase().as_str())
}

fn is_suffix_verbish(token: &str) -> bool {
    let lower = token.to_lowercase();
    lower.len() > 4 && (lower.ends_with("ed") || lower.ends_with("ing") || lower.ends_with("es"))
}

/// First verb-like token at index >= 1: lexicon verbs take precedence over
/// the inflection-suffix fallback (participles like "collected" often modify
/// the subject).
fn find_verb(tokens: &[String]) -> Option<usize> {
    (1..tokens.len())
        .find(|&i| is_lexicon_verb(&tokens[i]))
        .or_else(|| (1..tokens.len()).find(|&i| is_suffix_verbish(&tokens[i])))
}

fn words(text: &str) -> Vec<String> {
    text.trim()
        .trim_end_matches(['.', '!', '?'])
        .split_whitespace()
        .map(str::to_owned)
        .collect()
}

pub(super) struct Componentized {
    pub components: Vec<EventComponent>,
    pub comparator: Option<Comparator>,
    pub warnings: Vec<String>,
}

/// Splits a sentence into pattern-shaped components. Unknown arrangements
/// wrap the whole sentence as a single object component.
pub(super) fn componentize(text: &str, pattern: EventPattern) -> Componentized {
    let mut warnings = Vec::new();
    let tokens = words(text);
    let fallback = |warnings: Vec<String>| Componentized {
        components: vec![
            EventComponent::new(ComponentKind::Object, text.trim())
                .unwrap_or_else(|_| EventComponent::new(ComponentKind::Object, "?").unwrap()),
        ],
        comparator: None,
        warnings,
    };
    if tokens.is_empty() {
        warnings.push(format!("event text {text:?} is empty after trimming"));
        return fallback(warnings);
    }

    let built = match pattern {
        EventPattern::ObjAct => split_obj_act(&tokens, false, &mut warnings),
        EventPattern::ObjActObj => split_obj_act(&tokens, true, &mut warnings),
        EventPattern::ActObj => split_act_obj(&tokens, &mut warnings),
        EventPattern::ObjAttrCmpVal => split_attr_cmp_val(&tokens, ComponentKind::Object, &mut warnings),
        EventPattern::ActAttrCmpVal => split_attr_cmp_val(&tokens, ComponentKind::Action, &mut warnings),
        EventPattern::Other => None,
    };
    match built {
        Some((components, comparator)) => Componentized {
            components,
            comparator,
            warnings,
        },
        None => {
            if pattern != EventPattern::Other {
                warnings.push(format!(
                    "could not split {text:?} as {}; keeping the whole sentence",
                    pattern.canonical_name()
                ));
            }
            fallback(warnings)
        }
    }
}

type Split = (Vec<EventComponent>, Option<Comparator>);

fn component(kind: ComponentKind, tokens: &[String]) -> Option<EventComponent> {
    EventComponent::new(kind, tokens.join(" ")).ok()
}

fn split_obj_act(tokens: &[String], second_object: bool, warnings: &mut Vec<String>) -> Option<Split> {
    let minimum = if second_object { 3 } else { 2 };
    if tokens.len() < minimum {
        return None;
    }
    let verb_index = match find_verb(tokens) {
        Some(i) if !second_object || i + 1 < tokens.len() => i,
        _ => {
            warnings.push(format!(
                "no verb-like token found in {:?}; splitting at the last word",
                tokens.join(" ")
            ));
            if second_object {
                tokens.len().saturating_sub(2).max(1)
            } else {
                tokens.len() - 1
            }
        }
    };
    let object = component(ComponentKind::Object, &tokens[..verb_index])?;
    if second_object {
        let action = component(ComponentKind::Action, &tokens[verb_index..verb_index + 1])?;
        let object2 = component(ComponentKind::Object, &tokens[verb_index + 1..])?;
        Some((vec![object, action, object2], None))
    } else {
        let action = component(ComponentKind::Action, &tokens[verb_index..])?;
        Some((vec![object, action], None))
    }
}

fn split_act_obj(tokens: &[String], _warnings: &mut [String]) -> Option<Split> {
    if tokens.len() < 2 {
        return None;
    }
    let action = component(ComponentKind::Action, &tokens[..1])?;
    let object = component(ComponentKind::Object, &tokens[1..])?;
    Some((vec![action, object], None))
}

/// Comparator cues, multi-word first. "not exceed" style phrases invert the
/// raw direction of the verb.
const CUES: &[(&[&str], Comparator)] = &[
    (&["not", "exceed"], Comparator::Le),
    (&["no", "more", "than"], Comparator::Le),
    (&["at", "most"], Comparator::Le),
    (&["no", "less", "than"], Comparator::Ge),
    (&["at", "least"], Comparator::Ge),
    (&["more", "than"], Comparator::Gt),
    (&["greater", "than"], Comparator::Gt),
    (&["less", "than"], Comparator::Lt),
    (&["exceed"], Comparator::Gt),
    (&["exceeds"], Comparator::Gt),
    (&["within"], Comparator::Le),
    (&["below"], Comparator::Lt),
    (&["under"], Comparator::Lt),
    (&["above"], Comparator::Gt),
    (&["over"], Comparator::Gt),
    (&["equal"], Comparator::Eq),
    (&["equals"], Comparator::Eq),
];

fn find_cue(tokens: &[String]) -> Option<(usize, usize, Comparator)> {
    let lower: Vec<String> = tokens.iter().map(|t| t.to_lowercase()).collect();
    for (cue, cmp) in CUES {
        for start in 0..lower.len() {
            if start + cue.len() <= lower.len()
                && cue
                    .iter()
                    .zip(&lower[start..start + cue.len()])
                    .all(|(a, b)| a == b)
            {
                return Some((start, start + cue.len(), *cmp));
            }
        }
    }
    None
}

fn split_attr_cmp_val(
    tokens: &[String],
    head_kind: ComponentKind,
    warnings: &mut Vec<String>,
) -> Option<Split> {
    let (cue_start, cue_end, comparator) = match find_cue(tokens) {
        Some(found) => found,
        None => {
            warnings.push(format!(
                "no comparison phrase found in {:?}; treating the last word as the value",
                tokens.join(" ")
            ));
            (tokens.len() - 1, tokens.len() - 1, Comparator::Eq)
        }
    };
    if cue_end >= tokens.len() {
        return None;
    }
    let value = component(ComponentKind::Value, &tokens[cue_end..])?;
    // Head region before the cue, minus trailing modal words.
    let mut head_end = cue_start;
    while head_end > 0 && MODALS.contains(&tokens[head_end - 1].to_lowercase().as_str()) {
        head_end -= 1;
    }
    let head = &tokens[..head_end];
    if head.is_empty() {
        return None;
    }
    // "attribute of object" names both parts; otherwise the first word is
    // the head and the rest the attribute.
    let (head_tokens, attr_tokens): (&[String], &[String]) =
        match head.iter().position(|t| t.eq_ignore_ascii_case("of")) {
            Some(of_index) if of_index > 0 && of_index + 1 < head.len() => {
                (&head[of_index + 1..], &head[..of_index])
            }
            _ => {
                if head.len() < 2 {
                    warnings.push(format!(
                        "cannot separate {head_kind:?} from attribute in {:?}",
                        tokens.join(" ")
                    ));
                    return None;
                }
                (&head[..1], &head[1..])
            }
        };
    let head_component = component(head_kind, &strip_articles(head_tokens))?;
    let attribute = component(ComponentKind::Attribute, &strip_articles(attr_tokens))?;
    Some((vec![head_component, attribute, value], Some(comparator)))
}

fn strip_articles(tokens: &[String]) -> Vec<String> {
    let stripped: Vec<String> = tokens
        .iter()
        .filter(|t| !matches!(t.to_lowercase().as_str(), "the" | "a" | "an"))
        .cloned()
        .collect();
    if stripped.is_empty() {
        tokens.to_vec()
    } else {
        stripped
    }
}
