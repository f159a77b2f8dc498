//! Secondary structures: the pairing table plus dot-bracket and bpseq I/O.
//!
//! Positions are 0-based throughout the API. Error positions are 0-based
//! character offsets into the trimmed input; an offset equal to the input
//! length means "end of input".

use std::fmt;

use crate::error::{Error, Result};

const OPEN: [char; 4] = ['(', '[', '{', '<'];
const CLOSE: [char; 4] = [')', ']', '}', '>'];

/// A pairing of positions `0..len`, possibly pseudoknotted.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SecondaryStructure {
    partner: Vec<Option<usize>>,
    crossing: bool,
    sequence: Option<String>,
}

impl SecondaryStructure {
    /// Builds a structure from a list of pairs. Each pair may be given in
    /// either orientation.
    pub fn from_pairs(len: usize, pairs: &[(usize, usize)]) -> Result<Self> {
        let mut partner = vec![None; len];
        for &(a, b) in pairs {
            if a == b {
                return Err(Error::SelfPair(a));
            }
            if a >= len || b >= len || partner[a].is_some() || partner[b].is_some() {
                return Err(Error::AsymmetricPair { i: a, j: b });
            }
            partner[a] = Some(b);
            partner[b] = Some(a);
        }
        Ok(Self::from_partner_unchecked(partner))
    }

    /// Fully unpaired chain of the given length.
    pub fn unpaired(len: usize) -> Self {
        Self::from_partner_unchecked(vec![None; len])
    }

    pub(crate) fn from_partner_unchecked(partner: Vec<Option<usize>>) -> Self {
        let crossing = detect_crossing(&partner);
        SecondaryStructure {
            partner,
            crossing,
            sequence: None,
        }
    }

    pub fn len(&self) -> usize {
        self.partner.len()
    }

    pub fn is_empty(&self) -> bool {
        self.partner.is_empty()
    }

    pub fn partner(&self, i: usize) -> Option<usize> {
        self.partner[i]
    }

    pub fn partners(&self) -> &[Option<usize>] {
        &self.partner
    }

    pub fn is_crossing(&self) -> bool {
        self.crossing
    }

    /// Sequence letters carried over from a bpseq file, if any.
    pub fn sequence(&self) -> Option<&str> {
        self.sequence.as_deref()
    }

    pub fn with_sequence(mut self, seq: impl Into<String>) -> Self {
        self.sequence = Some(seq.into());
        self
    }

    /// Pairs `(i, j)` with `i < j`, ordered by `i`.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.partner
            .iter()
            .enumerate()
            .filter_map(|(i, p)| p.filter(|&j| j > i).map(|j| (i, j)))
    }

    pub fn num_pairs(&self) -> usize {
        self.pairs().count()
    }

    /// Dot-bracket rendering. Nested structures use round brackets only;
    /// crossing pairs are spread over `[]`, `{}` and `<>` greedily.
    pub fn to_dot_bracket(&self) -> Result<String> {
        let mut out = vec!['.'; self.len()];
        let mut families: [Vec<(usize, usize)>; 4] = Default::default();
        for (i, j) in self.pairs() {
            let family = families
                .iter()
                .position(|fam| fam.iter().all(|&(k, l)| !crosses((i, j), (k, l))))
                .ok_or(Error::TooManyBracketFamilies)?;
            families[family].push((i, j));
            out[i] = OPEN[family];
            out[j] = CLOSE[family];
        }
        Ok(out.into_iter().collect())
    }
}

impl fmt::Display for SecondaryStructure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.to_dot_bracket() {
            Ok(s) => f.write_str(&s),
            Err(_) => write!(f, "<{} positions, {} pairs>", self.len(), self.num_pairs()),
        }
    }
}

fn crosses((i, j): (usize, usize), (k, l): (usize, usize)) -> bool {
    (i < k && k < j && j < l) || (k < i && i < l && l < j)
}

// Single left-to-right sweep: pairs are non-crossing iff closing positions
// are matched in stack order.
fn detect_crossing(partner: &[Option<usize>]) -> bool {
    let mut stack = Vec::new();
    for (i, p) in partner.iter().enumerate() {
        match *p {
            Some(j) if j > i => stack.push(i),
            Some(j) if stack.pop() != Some(j) => return true,
            _ => {}
        }
    }
    false
}

/// Parses a dot-bracket string. Each of the four bracket families
/// `() [] {} <>` is matched independently, so pseudoknots can be written with
/// mixed families. Surrounding whitespace is ignored.
pub fn parse_dot_bracket(text: &str) -> Result<SecondaryStructure> {
    let text = text.trim();
    let chars: Vec<char> = text.chars().collect();
    let mut partner = vec![None; chars.len()];
    let mut stacks: [Vec<usize>; 4] = Default::default();
    for (pos, &ch) in chars.iter().enumerate() {
        if ch == '.' {
            continue;
        }
        if let Some(fam) = OPEN.iter().position(|&c| c == ch) {
            stacks[fam].push(pos);
        } else if let Some(fam) = CLOSE.iter().position(|&c| c == ch) {
            let open = stacks[fam]
                .pop()
                .ok_or(Error::UnbalancedBracket { position: pos })?;
            partner[open] = Some(pos);
            partner[pos] = Some(open);
        } else {
            return Err(Error::IllegalCharacter { ch, position: pos });
        }
    }
    if stacks.iter().any(|s| !s.is_empty()) {
        return Err(Error::UnbalancedBracket {
            position: chars.len(),
        });
    }
    Ok(SecondaryStructure::from_partner_unchecked(partner))
}

/// Parses a bpseq table: one `index base partner` line per position, with
/// `partner = 0` for unpaired bases. Lines starting with `#` are comments;
/// other lines whose first field is not an integer (file headers) are skipped.
pub fn parse_bpseq(text: &str) -> Result<SecondaryStructure> {
    let mut rows: Vec<(usize, char, usize)> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        let Ok(index) = fields[0].parse::<usize>() else {
            continue;
        };
        let malformed = || Error::MalformedLine {
            line: lineno + 1,
            text: line.to_string(),
        };
        if fields.len() != 3 {
            return Err(malformed());
        }
        let base = fields[1].chars().next().ok_or_else(malformed)?;
        let partner = fields[2].parse::<usize>().map_err(|_| malformed())?;
        rows.push((index, base, partner));
    }

    let n = rows.len();
    let mut seen = vec![false; n];
    for &(index, _, _) in &rows {
        if index == 0 || index > n || seen[index - 1] {
            return Err(Error::NonContiguousIndices {
                expected: n,
                found: index,
            });
        }
        seen[index - 1] = true;
    }
    rows.sort_by_key(|r| r.0);

    let mut partner = vec![None; n];
    for &(index, _, p) in &rows {
        if p == 0 {
            continue;
        }
        if p == index {
            return Err(Error::SelfPair(index));
        }
        if p > n || rows[p - 1].2 != index {
            return Err(Error::AsymmetricPair { i: index, j: p });
        }
        partner[index - 1] = Some(p - 1);
    }
    let sequence: String = rows.iter().map(|r| r.1).collect();
    Ok(SecondaryStructure::from_partner_unchecked(partner).with_sequence(sequence))
}

/// One entry of a dot-bracket file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DotBracketRecord {
    /// Record id: the first token of the `>` header, or `record_<n>`.
    pub id: String,
    /// Value of a `group=` tag in the header, if present.
    pub group: Option<String>,
    /// The raw structure token (not yet parsed).
    pub structure: String,
    /// 0-based index of the record in the file.
    pub index: usize,
}

/// Splits a dot-bracket file into records.
///
/// A record is an optional `>id [group=NAME ...]` header followed by one
/// structure line. Only the first whitespace-separated token of a structure
/// line is kept, so RNAfold-style `((..)) (-1.20)` lines work. Lines made of
/// letters only are taken to be sequence lines and ignored.
pub fn read_dot_bracket_records(text: &str) -> Vec<DotBracketRecord> {
    let mut out = Vec::new();
    let mut header: Option<(String, Option<String>)> = None;
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(rest) = line.strip_prefix('>') {
            let mut tokens = rest.split_whitespace();
            let id = tokens.next().unwrap_or("").to_string();
            let group = rest
                .split_whitespace()
                .find_map(|t| t.strip_prefix("group="))
                .map(str::to_string);
            header = Some((id, group));
            continue;
        }
        let token = line.split_whitespace().next().unwrap_or("");
        if token.chars().all(|c| c.is_ascii_alphabetic()) {
            continue;
        }
        let index = out.len();
        let (id, group) = header
            .take()
            .filter(|(id, _)| !id.is_empty())
            .unwrap_or_else(|| (format!("record_{}", index + 1), None));
        out.push(DotBracketRecord {
            id,
            group,
            structure: token.to_string(),
            index,
        });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pairs_of(s: &SecondaryStructure) -> Vec<(usize, usize)> {
        s.pairs().collect()
    }

    #[test]
    fn parses_nested_dot_bracket() {
        let s = parse_dot_bracket("((..))").unwrap();
        assert_eq!(pairs_of(&s), vec![(0, 5), (1, 4)]);
        assert!(!s.is_crossing());
    }

    #[test]
    fn parses_empty_string() {
        let s = parse_dot_bracket("").unwrap();
        assert_eq!(s.len(), 0);
        assert_eq!(s.num_pairs(), 0);
        let s = parse_dot_bracket("   \n").unwrap();
        assert!(s.is_empty());
    }

    #[test]
    fn mixed_families_make_pseudoknot() {
        let s = parse_dot_bracket("([)]").unwrap();
        assert_eq!(pairs_of(&s), vec![(0, 2), (1, 3)]);
        assert!(s.is_crossing());
    }

    #[test]
    fn unclosed_bracket_reports_end() {
        assert_eq!(
            parse_dot_bracket("((.)"),
            Err(Error::UnbalancedBracket { position: 4 })
        );
        assert_eq!(
            parse_dot_bracket(".)"),
            Err(Error::UnbalancedBracket { position: 1 })
        );
    }

    #[test]
    fn rejects_illegal_characters() {
        assert_eq!(
            parse_dot_bracket("(x)"),
            Err(Error::IllegalCharacter { ch: 'x', position: 1 })
        );
    }

    #[test]
    fn render_uses_extra_families_for_crossings() {
        let s = parse_dot_bracket("(<[)>]").unwrap();
        let rendered = s.to_dot_bracket().unwrap();
        assert_eq!(parse_dot_bracket(&rendered).unwrap(), s);
        assert_eq!(
            parse_dot_bracket(".(..)").unwrap().to_dot_bracket().unwrap(),
            ".(..)"
        );
    }

    #[test]
    fn bpseq_examples() {
        let s = parse_bpseq("1 A 3\n2 C 0\n3 G 1\n").unwrap();
        assert_eq!(pairs_of(&s), vec![(0, 2)]);
        assert_eq!(s.sequence(), Some("ACG"));

        let s = parse_bpseq("1 A 2\n2 C 1\n3 G 0\n").unwrap();
        assert_eq!(pairs_of(&s), vec![(0, 1)]);

        assert_eq!(
            parse_bpseq("1 A 2\n2 C 3\n3 G 2\n"),
            Err(Error::AsymmetricPair { i: 1, j: 2 })
        );
    }

    #[test]
    fn bpseq_errors() {
        assert_eq!(parse_bpseq("1 A 1\n"), Err(Error::SelfPair(1)));
        assert!(matches!(
            parse_bpseq("1 A 0\n3 C 0\n"),
            Err(Error::NonContiguousIndices { .. })
        ));
        assert!(matches!(
            parse_bpseq("1 A 0\n2 C\n"),
            Err(Error::MalformedLine { line: 2, .. })
        ));
    }

    #[test]
    fn bpseq_skips_comments_and_headers() {
        let text = "Filename: x.bpseq\n# comment\n1 G 4\n2 A 0\n3 A 0\n4 C 1\n";
        let s = parse_bpseq(text).unwrap();
        assert_eq!(pairs_of(&s), vec![(0, 3)]);
    }

    #[test]
    fn reads_records_with_headers_and_bare_lines() {
        let text = ">a group=tRNA extra\n((..))\n..()\n>b\nACGU\n(..) (-1.30)\n";
        let recs = read_dot_bracket_records(text);
        assert_eq!(recs.len(), 3);
        assert_eq!(recs[0].id, "a");
        assert_eq!(recs[0].group.as_deref(), Some("tRNA"));
        assert_eq!(recs[1].id, "record_2");
        assert_eq!(recs[2].id, "b");
        assert_eq!(recs[2].structure, "(..)");
    }

    #[test]
    fn from_pairs_validates() {
        assert_eq!(
            SecondaryStructure::from_pairs(3, &[(1, 1)]),
            Err(Error::SelfPair(1))
        );
        assert!(SecondaryStructure::from_pairs(3, &[(0, 1), (1, 2)]).is_err());
        let s = SecondaryStructure::from_pairs(4, &[(2, 0)]).unwrap();
        assert_eq!(s.partner(0), Some(2));
    }
}
