//! Owned intermediate tree produced by the recursive-descent parsers and
//! flattened into a [`SyntaxTree`] once parsing is done.

use crate::cst::{node_id, NodeData, NodeId, NodeKind, ParsedFile, SourceLanguage, Span, SyntaxTree};

#[derive(Debug)]
pub(crate) struct RawNode {
    pub kind: NodeKind,
    pub start: usize,
    pub end: usize,
    pub aux: Option<String>,
    pub children: Vec<RawNode>,
}

impl RawNode {
    pub fn leaf(kind: NodeKind, start: usize, end: usize) -> Self {
        RawNode { kind, start, end, aux: None, children: Vec::new() }
    }

    pub fn leaf_aux(kind: NodeKind, start: usize, end: usize, aux: &str) -> Self {
        RawNode { kind, start, end, aux: Some(aux.to_string()), children: Vec::new() }
    }

    /// Composite node spanning from the first to the last child. `children`
    /// must be non-empty and in source order.
    pub fn wrap(kind: NodeKind, children: Vec<RawNode>) -> Self {
        let start = children.first().map_or(0, |c| c.start);
        let end = children.last().map_or(start, |c| c.end);
        RawNode { kind, start, end, aux: None, children }
    }

    pub fn with_aux(mut self, aux: impl Into<String>) -> Self {
        self.aux = Some(aux.into());
        self
    }

    pub fn spanning(kind: NodeKind, start: usize, end: usize, children: Vec<RawNode>) -> Self {
        RawNode { kind, start, end, aux: None, children }
    }
}

/// Byte offsets of line starts, for offset → (line, column) lookups.
pub(crate) struct LineIndex {
    starts: Vec<usize>,
}

impl LineIndex {
    pub fn new(text: &str) -> Self {
        let mut starts = vec![0];
        starts.extend(text.bytes().enumerate().filter(|&(_, b)| b == b'\n').map(|(i, _)| i + 1));
        LineIndex { starts }
    }

    /// 1-based line containing `offset`.
    pub fn line(&self, offset: usize) -> usize {
        self.starts.partition_point(|&s| s <= offset)
    }

    pub fn column(&self, offset: usize) -> usize {
        offset - self.starts[self.line(offset) - 1] + 1
    }
}

/// Attaches comment spans to the deepest node whose span encloses them, at
/// the position that keeps siblings ordered.
pub(crate) fn attach_comments(root: &mut RawNode, comments: &[(usize, usize)]) {
    for &(start, end) in comments {
        let mut node = &mut *root;
        loop {
            let pos = node.children.partition_point(|c| c.end <= start);
            let descend = node.children.get(pos).is_some_and(|c| c.start <= start && end <= c.end);
            if descend {
                node = &mut node.children[pos];
            } else {
                node.children.insert(pos, RawNode::leaf(NodeKind::COMMENT, start, end));
                break;
            }
        }
    }
}

/// Grows every span to cover its children, post-order and without
/// recursion.
fn widen(root: RawNode) -> RawNode {
    type Frame = (RawNode, std::vec::IntoIter<RawNode>, Vec<RawNode>);
    let open = |mut n: RawNode| -> Frame {
        let kids = std::mem::take(&mut n.children);
        let cap = kids.len();
        (n, kids.into_iter(), Vec::with_capacity(cap))
    };
    let mut stack = vec![open(root)];
    loop {
        let top = stack.last_mut().expect("stack holds the root until it is returned");
        if let Some(child) = top.1.next() {
            stack.push(open(child));
            continue;
        }
        let (mut node, _, done) = stack.pop().expect("nonempty");
        for c in &done {
            node.start = node.start.min(c.start);
            node.end = node.end.max(c.end);
        }
        node.children = done;
        match stack.last_mut() {
            Some(parent) => parent.2.push(node),
            None => return node,
        }
    }
}

pub(crate) fn build_file(
    path: &str,
    language: SourceLanguage,
    source: String,
    mut root: RawNode,
    comments: &[(usize, usize)],
    diagnostics: Vec<String>,
) -> ParsedFile {
    root.kind = NodeKind::FILE;
    root.start = 0;
    root.end = source.len();
    let mut root = widen(root);
    attach_comments(&mut root, comments);
    let tree = flatten(root, &source);
    ParsedFile { path: path.to_string(), language, source, tree, diagnostics }
}

/// Moves the raw tree into a preorder arena without recursion, so very deep
/// trees neither overflow the stack here nor when dropped.
fn flatten(root: RawNode, source: &str) -> SyntaxTree {
    let lines = LineIndex::new(source);
    let mut nodes: Vec<NodeData> = Vec::new();
    let mut stack: Vec<(RawNode, Option<NodeId>)> = vec![(root, None)];
    while let Some((mut raw, parent)) = stack.pop() {
        let idx = nodes.len() as u32;
        nodes.push(NodeData {
            kind: raw.kind,
            span: Span { start_byte: raw.start, end_byte: raw.end, start_line: 0 },
            parent,
            subtree_end: idx + 1,
            aux: raw.aux.take().map(String::into_boxed_str),
        });
        let children = std::mem::take(&mut raw.children);
        let me = node_id(idx);
        for child in children.into_iter().rev() {
            stack.push((child, Some(me)));
        }
    }
    // Children sit after their parent, so a reverse sweep sees every child
    // before its parent: propagate subtree ends and widen parent spans.
    for i in (1..nodes.len()).rev() {
        let (end, span) = (nodes[i].subtree_end, nodes[i].span);
        if let Some(p) = nodes[i].parent {
            let parent = &mut nodes[p.index()];
            parent.subtree_end = parent.subtree_end.max(end);
            parent.span.start_byte = parent.span.start_byte.min(span.start_byte);
            parent.span.end_byte = parent.span.end_byte.max(span.end_byte);
        }
    }
    for node in &mut nodes {
        node.span.start_line = lines.line(node.span.start_byte);
    }
    SyntaxTree::from_preorder(nodes)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_index_lookup() {
        let idx = LineIndex::new("ab\ncd\n\nx");
        assert_eq!(idx.line(0), 1);
        assert_eq!(idx.line(2), 1);
        assert_eq!(idx.line(3), 2);
        assert_eq!(idx.line(6), 3);
        assert_eq!(idx.line(7), 4);
        assert_eq!(idx.column(4), 2);
    }

    #[test]
    fn comments_land_between_siblings() {
        let mut root = RawNode::spanning(
            NodeKind::FILE,
            0,
            30,
            vec![
                RawNode::leaf(NodeKind::IDENTIFIER, 0, 3),
                RawNode::wrap(
                    NodeKind::BLOCK,
                    vec![RawNode::leaf(NodeKind::IDENTIFIER, 10, 12), RawNode::leaf(NodeKind::IDENTIFIER, 20, 22)],
                ),
            ],
        );
        attach_comments(&mut root, &[(4, 8), (14, 18), (25, 30)]);
        let kinds: Vec<_> = root.children.iter().map(|c| c.kind).collect();
        assert_eq!(kinds, [NodeKind::IDENTIFIER, NodeKind::COMMENT, NodeKind::BLOCK, NodeKind::COMMENT]);
        assert_eq!(root.children[2].children[1].kind, NodeKind::COMMENT);
    }

    #[test]
    fn deep_chain_flattens_without_recursion() {
        let mut node = RawNode::leaf(NodeKind::INT_LITERAL, 0, 1);
        for _ in 0..200_000 {
            node = RawNode::wrap(NodeKind::PAREN_EXPR, vec![node]);
        }
        let file = build_file("x.py", SourceLanguage::Python, "1".into(), node, &[], vec![]);
        assert_eq!(file.tree.len(), 200_001);
        file.validate().unwrap();
    }
}
