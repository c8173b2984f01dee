//! Language-independent concrete syntax tree.
//!
//! Nodes are stored in a flat arena in preorder. Every node records the
//! index one past the end of its subtree, so a subtree is a contiguous slice
//! and preorder traversal is a plain scan. Parent links are stored
//! explicitly because context resolution walks upward a lot.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::CstError;

/// Source languages with a registered frontend.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SourceLanguage {
    Kotlin,
    Python,
}

impl SourceLanguage {
    pub fn name(self) -> &'static str {
        match self {
            SourceLanguage::Kotlin => "kotlin",
            SourceLanguage::Python => "python",
        }
    }
}

impl fmt::Display for SourceLanguage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Closed set of node kinds shared by all frontends. `Other` is the catch-all
/// for constructs no analyzer needs to tell apart.
#[allow(non_camel_case_types)]
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum NodeKind {
    FILE,
    FUNCTION_DECL,
    BLOCK,
    FOR_STMT,
    WHILE_STMT,
    DO_WHILE_STMT,
    IF_STMT,
    WHEN_STMT,
    BINARY_EXPR,
    INFIX_CALL,
    CALL_EXPR,
    MEMBER_CALL,
    PAREN_EXPR,
    UNARY_EXPR,
    LAMBDA,
    INT_LITERAL,
    BOOL_LITERAL,
    STRING_LITERAL,
    IDENTIFIER,
    OPERATOR_TOKEN,
    COMMENT,
    OTHER,
}

impl NodeKind {
    pub const ALL: [NodeKind; 22] = [
        NodeKind::FILE,
        NodeKind::FUNCTION_DECL,
        NodeKind::BLOCK,
        NodeKind::FOR_STMT,
        NodeKind::WHILE_STMT,
        NodeKind::DO_WHILE_STMT,
        NodeKind::IF_STMT,
        NodeKind::WHEN_STMT,
        NodeKind::BINARY_EXPR,
        NodeKind::INFIX_CALL,
        NodeKind::CALL_EXPR,
        NodeKind::MEMBER_CALL,
        NodeKind::PAREN_EXPR,
        NodeKind::UNARY_EXPR,
        NodeKind::LAMBDA,
        NodeKind::INT_LITERAL,
        NodeKind::BOOL_LITERAL,
        NodeKind::STRING_LITERAL,
        NodeKind::IDENTIFIER,
        NodeKind::OPERATOR_TOKEN,
        NodeKind::COMMENT,
        NodeKind::OTHER,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            NodeKind::FILE => "FILE",
            NodeKind::FUNCTION_DECL => "FUNCTION_DECL",
            NodeKind::BLOCK => "BLOCK",
            NodeKind::FOR_STMT => "FOR_STMT",
            NodeKind::WHILE_STMT => "WHILE_STMT",
            NodeKind::DO_WHILE_STMT => "DO_WHILE_STMT",
            NodeKind::IF_STMT => "IF_STMT",
            NodeKind::WHEN_STMT => "WHEN_STMT",
            NodeKind::BINARY_EXPR => "BINARY_EXPR",
            NodeKind::INFIX_CALL => "INFIX_CALL",
            NodeKind::CALL_EXPR => "CALL_EXPR",
            NodeKind::MEMBER_CALL => "MEMBER_CALL",
            NodeKind::PAREN_EXPR => "PAREN_EXPR",
            NodeKind::UNARY_EXPR => "UNARY_EXPR",
            NodeKind::LAMBDA => "LAMBDA",
            NodeKind::INT_LITERAL => "INT_LITERAL",
            NodeKind::BOOL_LITERAL => "BOOL_LITERAL",
            NodeKind::STRING_LITERAL => "STRING_LITERAL",
            NodeKind::IDENTIFIER => "IDENTIFIER",
            NodeKind::OPERATOR_TOKEN => "OPERATOR_TOKEN",
            NodeKind::COMMENT => "COMMENT",
            NodeKind::OTHER => "OTHER",
        }
    }

    pub fn parse(s: &str) -> Option<NodeKind> {
        NodeKind::ALL.iter().copied().find(|k| k.as_str() == s)
    }
}

impl fmt::Display for NodeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Byte range of a node plus the 1-based line its first byte sits on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Span {
    pub start_byte: usize,
    pub end_byte: usize,
    pub start_line: usize,
}

impl Span {
    pub fn len(&self) -> usize {
        self.end_byte - self.start_byte
    }

    pub fn is_empty(&self) -> bool {
        self.start_byte == self.end_byte
    }

    pub fn contains(&self, other: &Span) -> bool {
        self.start_byte <= other.start_byte && other.end_byte <= self.end_byte
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(u32);

impl NodeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

pub(crate) fn node_id(idx: u32) -> NodeId {
    NodeId(idx)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct NodeData {
    pub(crate) kind: NodeKind,
    pub(crate) span: Span,
    pub(crate) parent: Option<NodeId>,
    pub(crate) subtree_end: u32,
    pub(crate) aux: Option<Box<str>>,
}

/// Immutable arena holding one file's tree in preorder.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SyntaxTree {
    nodes: Vec<NodeData>,
}

impl SyntaxTree {
    /// Nodes must already be in preorder with consistent parent and
    /// subtree_end fields; the frontend builder guarantees this.
    pub(crate) fn from_preorder(nodes: Vec<NodeData>) -> Self {
        debug_assert!(!nodes.is_empty());
        SyntaxTree { nodes }
    }

    pub fn root(&self) -> SyntaxNode<'_> {
        SyntaxNode { tree: self, id: NodeId(0) }
    }

    pub fn node(&self, id: NodeId) -> SyntaxNode<'_> {
        assert!(id.index() < self.nodes.len(), "node id out of range");
        SyntaxNode { tree: self, id }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// All nodes in preorder.
    pub fn iter(&self) -> Preorder<'_> {
        self.root().preorder()
    }
}

/// A cheap, copyable handle to one node of a [`SyntaxTree`].
#[derive(Clone, Copy)]
pub struct SyntaxNode<'t> {
    tree: &'t SyntaxTree,
    id: NodeId,
}

impl PartialEq for SyntaxNode<'_> {
    fn eq(&self, other: &Self) -> bool {
        std::ptr::eq(self.tree, other.tree) && self.id == other.id
    }
}

impl Eq for SyntaxNode<'_> {}

impl fmt::Debug for SyntaxNode<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}@{}..{}", self.kind(), self.span().start_byte, self.span().end_byte)?;
        if let Some(aux) = self.aux() {
            write!(f, "({aux:?})")?;
        }
        Ok(())
    }
}

impl<'t> SyntaxNode<'t> {
    fn data(&self) -> &'t NodeData {
        &self.tree.nodes[self.id.index()]
    }

    pub fn id(&self) -> NodeId {
        self.id
    }

    pub fn tree(&self) -> &'t SyntaxTree {
        self.tree
    }

    pub fn kind(&self) -> NodeKind {
        self.data().kind
    }

    pub fn span(&self) -> Span {
        self.data().span
    }

    pub fn line(&self) -> usize {
        self.data().span.start_line
    }

    /// Operator lexeme, identifier name or callee name, depending on kind.
    pub fn aux(&self) -> Option<&'t str> {
        self.data().aux.as_deref()
    }

    pub fn parent(&self) -> Option<SyntaxNode<'t>> {
        self.data().parent.map(|id| SyntaxNode { tree: self.tree, id })
    }

    pub fn is_root(&self) -> bool {
        self.data().parent.is_none()
    }

    pub fn children(&self) -> Children<'t> {
        Children { tree: self.tree, next: self.id.0 + 1, end: self.data().subtree_end }
    }

    /// Children that carry syntax, i.e. everything except comments.
    pub fn significant_children(&self) -> impl Iterator<Item = SyntaxNode<'t>> {
        self.children().filter(|c| c.kind() != NodeKind::COMMENT)
    }

    pub fn first_child_of(&self, kind: NodeKind) -> Option<SyntaxNode<'t>> {
        self.children().find(|c| c.kind() == kind)
    }

    /// Number of nodes in this subtree, including this one.
    pub fn subtree_size(&self) -> usize {
        (self.data().subtree_end - self.id.0) as usize
    }

    /// This node followed by its whole subtree, children in source order.
    pub fn preorder(&self) -> Preorder<'t> {
        Preorder { tree: self.tree, next: self.id.0, end: self.data().subtree_end }
    }

    /// Parent, grandparent, ... up to and including the root.
    pub fn ancestors(&self) -> Ancestors<'t> {
        Ancestors { next: self.parent() }
    }

    pub fn descendants_of_kind(&self, kind: NodeKind) -> impl Iterator<Item = SyntaxNode<'t>> {
        self.preorder().skip(1).filter(move |n| n.kind() == kind)
    }
}

pub struct Children<'t> {
    tree: &'t SyntaxTree,
    next: u32,
    end: u32,
}

impl<'t> Iterator for Children<'t> {
    type Item = SyntaxNode<'t>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.next >= self.end {
            return None;
        }
        let node = SyntaxNode { tree: self.tree, id: NodeId(self.next) };
        self.next = self.tree.nodes[self.next as usize].subtree_end;
        Some(node)
    }
}

pub struct Preorder<'t> {
    tree: &'t SyntaxTree,
    next: u32,
    end: u32,
}

impl<'t> Iterator for Preorder<'t> {
    type Item = SyntaxNode<'t>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.next >= self.end {
            return None;
        }
        let node = SyntaxNode { tree: self.tree, id: NodeId(self.next) };
        self.next += 1;
        Some(node)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let n = (self.end - self.next) as usize;
        (n, Some(n))
    }
}

impl ExactSizeIterator for Preorder<'_> {}

pub struct Ancestors<'t> {
    next: Option<SyntaxNode<'t>>,
}

impl<'t> Iterator for Ancestors<'t> {
    type Item = SyntaxNode<'t>;

    fn next(&mut self) -> Option<Self::Item> {
        let node = self.next?;
        self.next = node.parent();
        Some(node)
    }
}

/// Free-function form of [`SyntaxNode::preorder`].
pub fn preorder(root: SyntaxNode<'_>) -> Preorder<'_> {
    root.preorder()
}

/// Free-function form of [`SyntaxNode::ancestors`].
pub fn ancestors(node: SyntaxNode<'_>) -> Ancestors<'_> {
    node.ancestors()
}

/// One parsed source file.
#[derive(Debug, Clone)]
pub struct ParsedFile {
    /// Project-relative path with `/` separators.
    pub path: String,
    pub language: SourceLanguage,
    pub source: String,
    pub tree: SyntaxTree,
    pub diagnostics: Vec<String>,
}

impl ParsedFile {
    pub fn root(&self) -> SyntaxNode<'_> {
        self.tree.root()
    }

    /// Exact source slice covered by `node`.
    pub fn node_text(&self, node: SyntaxNode<'_>) -> Result<&str, CstError> {
        let span = node.span();
        if span.start_byte > span.end_byte || span.end_byte > self.source.len() {
            return Err(CstError::SpanOutOfBounds {
                start: span.start_byte,
                end: span.end_byte,
                len: self.source.len(),
            });
        }
        self.source
            .get(span.start_byte..span.end_byte)
            .ok_or(CstError::NotCharBoundary { start: span.start_byte, end: span.end_byte })
    }

    pub fn has_diagnostics(&self) -> bool {
        !self.diagnostics.is_empty()
    }

    /// Checks every structural invariant of the tree: root shape, parent
    /// consistency, span nesting and sibling ordering.
    pub fn validate(&self) -> Result<(), CstError> {
        let root = self.root();
        let bad = |msg: String| Err(CstError::Malformed(msg));
        if root.kind() != NodeKind::FILE || !root.is_root() {
            return bad("root must be a parentless FILE node".into());
        }
        if root.span().start_byte != 0 || root.span().end_byte != self.source.len() {
            return bad(format!("root span {:?} does not cover the file", root.span()));
        }
        if root.subtree_size() != self.tree.len() {
            return bad("root subtree does not cover the arena".into());
        }
        for node in root.preorder() {
            let span = node.span();
            if span.start_byte > span.end_byte || span.end_byte > self.source.len() {
                return bad(format!("{node:?} has an out-of-bounds span"));
            }
            if node != root && node.kind() == NodeKind::FILE {
                return bad(format!("{node:?} is a nested FILE node"));
            }
            let mut prev_end = span.start_byte;
            for child in node.children() {
                if child.parent() != Some(node) {
                    return bad(format!("{child:?} has an inconsistent parent"));
                }
                if !span.contains(&child.span()) {
                    return bad(format!("{child:?} escapes parent {node:?}"));
                }
                if child.span().start_byte < prev_end {
                    return bad(format!("{child:?} overlaps its previous sibling"));
                }
                prev_end = child.span().end_byte;
            }
        }
        Ok(())
    }

    /// Indented `KIND(aux)` dump of the tree, one node per line.
    pub fn debug_tree(&self) -> String {
        let mut out = String::new();
        for node in self.root().preorder() {
            let depth = node.ancestors().count();
            out.push_str(&"  ".repeat(depth));
            out.push_str(node.kind().as_str());
            if let Some(aux) = node.aux() {
                out.push('(');
                out.push_str(aux);
                out.push(')');
            }
            out.push('\n');
        }
        out
    }
}
