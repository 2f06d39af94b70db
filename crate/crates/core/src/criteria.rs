//! The 19 item-writing-flaw criteria and their detection tiers.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// One item-writing-flaw criterion.
///
/// Declaration order is the canonical order: it matches the gold CSV column
/// order and is the order detectors run in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CriterionId {
    LongestOptionCorrect,
    AmbiguousInformation,
    ImplausibleDistractors,
    TrueOrFalse,
    AbsoluteTerms,
    ComplexKType,
    NegativelyWorded,
    ConvergenceCues,
    LostSequence,
    UnfocusedStem,
    NoneOfTheAbove,
    WordRepeats,
    MoreThanOneCorrect,
    LogicalCues,
    AllOfTheAbove,
    FillInTheBlank,
    VagueTerms,
    GrammaticalCues,
    GratuitousInformation,
}

/// Which family of techniques produces a criterion's verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Tier {
    TextMatch,
    Nlp,
    LlmVerified,
}

impl CriterionId {
    pub const COUNT: usize = 19;

    pub const ALL: [CriterionId; 19] = [
        CriterionId::LongestOptionCorrect,
        CriterionId::AmbiguousInformation,
        CriterionId::ImplausibleDistractors,
        CriterionId::TrueOrFalse,
        CriterionId::AbsoluteTerms,
        CriterionId::ComplexKType,
        CriterionId::NegativelyWorded,
        CriterionId::ConvergenceCues,
        CriterionId::LostSequence,
        CriterionId::UnfocusedStem,
        CriterionId::NoneOfTheAbove,
        CriterionId::WordRepeats,
        CriterionId::MoreThanOneCorrect,
        CriterionId::LogicalCues,
        CriterionId::AllOfTheAbove,
        CriterionId::FillInTheBlank,
        CriterionId::VagueTerms,
        CriterionId::GrammaticalCues,
        CriterionId::GratuitousInformation,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn key(self) -> &'static str {
        match self {
            CriterionId::LongestOptionCorrect => "longest_option_correct",
            CriterionId::AmbiguousInformation => "ambiguous_information",
            CriterionId::ImplausibleDistractors => "implausible_distractors",
            CriterionId::TrueOrFalse => "true_or_false",
            CriterionId::AbsoluteTerms => "absolute_terms",
            CriterionId::ComplexKType => "complex_k_type",
            CriterionId::NegativelyWorded => "negatively_worded",
            CriterionId::ConvergenceCues => "convergence_cues",
            CriterionId::LostSequence => "lost_sequence",
            CriterionId::UnfocusedStem => "unfocused_stem",
            CriterionId::NoneOfTheAbove => "none_of_the_above",
            CriterionId::WordRepeats => "word_repeats",
            CriterionId::MoreThanOneCorrect => "more_than_one_correct",
            CriterionId::LogicalCues => "logical_cues",
            CriterionId::AllOfTheAbove => "all_of_the_above",
            CriterionId::FillInTheBlank => "fill_in_the_blank",
            CriterionId::VagueTerms => "vague_terms",
            CriterionId::GrammaticalCues => "grammatical_cues",
            CriterionId::GratuitousInformation => "gratuitous_information",
        }
    }

    /// Human-readable name as used in report tables.
    pub fn title(self) -> &'static str {
        match self {
            CriterionId::LongestOptionCorrect => "Longest Option Correct",
            CriterionId::AmbiguousInformation => "Ambiguous Information",
            CriterionId::ImplausibleDistractors => "Implausible Distractors",
            CriterionId::TrueOrFalse => "True or False",
            CriterionId::AbsoluteTerms => "Absolute Terms",
            CriterionId::ComplexKType => "Complex or K-type",
            CriterionId::NegativelyWorded => "Negatively Worded",
            CriterionId::ConvergenceCues => "Convergence Cues",
            CriterionId::LostSequence => "Lost Sequence",
            CriterionId::UnfocusedStem => "Unfocused Stem",
            CriterionId::NoneOfTheAbove => "None of the Above",
            CriterionId::WordRepeats => "Word Repeats",
            CriterionId::MoreThanOneCorrect => "More Than One Correct",
            CriterionId::LogicalCues => "Logical Cues",
            CriterionId::AllOfTheAbove => "All of the Above",
            CriterionId::FillInTheBlank => "Fill in the Blank",
            CriterionId::VagueTerms => "Vague Terms",
            CriterionId::GrammaticalCues => "Grammatical Cues",
            CriterionId::GratuitousInformation => "Gratuitous Information",
        }
    }

    pub fn tier(self) -> Tier {
        use CriterionId::*;
        match self {
            NoneOfTheAbove | AllOfTheAbove | FillInTheBlank | TrueOrFalse | LongestOptionCorrect
            | NegativelyWorded | LostSequence | VagueTerms => Tier::TextMatch,
            ImplausibleDistractors | WordRepeats | LogicalCues | AmbiguousInformation
            | GrammaticalCues => Tier::Nlp,
            AbsoluteTerms | MoreThanOneCorrect | ComplexKType | GratuitousInformation
            | UnfocusedStem | ConvergenceCues => Tier::LlmVerified,
        }
    }
}

impl fmt::Display for CriterionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

impl FromStr for CriterionId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        CriterionId::ALL
            .iter()
            .copied()
            .find(|c| c.key() == s)
            .ok_or_else(|| format!("unknown criterion `{s}`"))
    }
}

/// A fixed-size boolean vector indexed by criterion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct FlagSet(pub [bool; CriterionId::COUNT]);

impl FlagSet {
    pub fn get(&self, c: CriterionId) -> bool {
        self.0[c.index()]
    }

    pub fn set(&mut self, c: CriterionId, value: bool) {
        self.0[c.index()] = value;
    }

    pub fn count(&self) -> usize {
        self.0.iter().filter(|b| **b).count()
    }

    pub fn flagged(&self) -> impl Iterator<Item = CriterionId> + '_ {
        CriterionId::ALL.iter().copied().filter(|c| self.get(*c))
    }
}

/// Zero or one flaw is acceptable; two or more is not.
pub fn is_acceptable(flaw_count: usize) -> bool {
    flaw_count <= 1
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_order_matches_indices() {
        for (i, c) in CriterionId::ALL.iter().enumerate() {
            assert_eq!(c.index(), i);
            assert_eq!(c.key().parse::<CriterionId>().unwrap(), *c);
        }
    }

    #[test]
    fn tier_sizes() {
        let count = |t| CriterionId::ALL.iter().filter(|c| c.tier() == t).count();
        assert_eq!(count(Tier::TextMatch), 8);
        assert_eq!(count(Tier::Nlp), 5);
        assert_eq!(count(Tier::LlmVerified), 6);
    }

    #[test]
    fn serde_uses_snake_keys() {
        let s = serde_json::to_string(&CriterionId::ComplexKType).unwrap();
        assert_eq!(s, "\"complex_k_type\"");
    }

    #[test]
    fn acceptability_threshold() {
        assert!(is_acceptable(0));
        assert!(is_acceptable(1));
        assert!(!is_acceptable(2));
    }
}
