//! Source positions.
//!
//! Offsets are byte offsets into the UTF-8 source. Lines and columns are
//! 1-based; columns count code points. `end_line`/`end_col` describe the
//! position just past the last covered character.

use std::fmt;

/// Opaque handle naming one source file inside a session or project.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FileId(pub u32);

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct SourceSpan {
    pub file: FileId,
    pub start: usize,
    pub end: usize,
    pub start_line: u32,
    pub start_col: u32,
    pub end_line: u32,
    pub end_col: u32,
}

impl SourceSpan {
    /// Smallest span enclosing both `self` and `other`.
    pub fn cover(self, other: SourceSpan) -> SourceSpan {
        let (start, start_line, start_col) = if other.start < self.start {
            (other.start, other.start_line, other.start_col)
        } else {
            (self.start, self.start_line, self.start_col)
        };
        let (end, end_line, end_col) = if other.end > self.end {
            (other.end, other.end_line, other.end_col)
        } else {
            (self.end, self.end_line, self.end_col)
        };
        SourceSpan { file: self.file, start, end, start_line, start_col, end_line, end_col }
    }

    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.start == self.end
    }

    /// True when `offset` falls inside the half-open range `[start, end)`.
    pub fn contains(&self, offset: usize) -> bool {
        self.start <= offset && offset < self.end
    }

    pub fn encloses(&self, other: &SourceSpan) -> bool {
        self.start <= other.start && other.end <= self.end
    }
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}-{}:{}", self.start_line, self.start_col, self.end_line, self.end_col)
    }
}

/// Maps byte offsets to line/column positions and back.
#[derive(Clone, Debug)]
pub struct LineIndex {
    line_starts: Vec<usize>,
}

impl LineIndex {
    pub fn new(source: &str) -> Self {
        let mut line_starts = vec![0];
        line_starts.extend(source.match_indices('\n').map(|(i, _)| i + 1));
        LineIndex { line_starts }
    }

    pub fn line_count(&self) -> usize {
        self.line_starts.len()
    }

    /// 1-based (line, column) of a byte offset. Offsets past the end clamp.
    pub fn position(&self, source: &str, offset: usize) -> (u32, u32) {
        let offset = offset.min(source.len());
        let line = match self.line_starts.binary_search(&offset) {
            Ok(i) => i,
            Err(i) => i - 1,
        };
        let start = self.line_starts[line];
        let col = source[start..offset].chars().count();
        (line as u32 + 1, col as u32 + 1)
    }

    pub fn span(&self, source: &str, file: FileId, start: usize, end: usize) -> SourceSpan {
        let (start_line, start_col) = self.position(source, start);
        let (end_line, end_col) = self.position(source, end);
        SourceSpan { file, start, end, start_line, start_col, end_line, end_col }
    }

    /// Byte offset of a 1-based line/column. A column one past the end of
    /// the line is accepted; anything further is rejected.
    pub fn offset(&self, source: &str, line: u32, col: u32) -> Option<usize> {
        if line == 0 || col == 0 {
            return None;
        }
        let start = *self.line_starts.get(line as usize - 1)?;
        let end = self
            .line_starts
            .get(line as usize)
            .map(|next| next - 1)
            .unwrap_or(source.len());
        let text = &source[start..end];
        let want = col as usize - 1;
        let mut seen = 0;
        for (i, _) in text.char_indices() {
            if seen == want {
                return Some(start + i);
            }
            seen += 1;
        }
        (seen == want).then_some(end)
    }
}
