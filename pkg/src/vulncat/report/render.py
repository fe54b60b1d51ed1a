"""
Markdown and LaTeX renderers for report documents.
"""

from __future__ import annotations

from enum import StrEnum

from .document import BulletList, ListItem, Paragraph, ReportDocument, Section, Table


class RenderTarget(StrEnum):
    MARKDOWN = "md"
    LATEX = "tex"

    @property
    def suffix(self) -> str:
        return f".{self.value}"


_LATEX_ESCAPES = {
    "\\": r"\textbackslash{}",
    "#": r"\#",
    "$": r"\$",
    "%": r"\%",
    "&": r"\&",
    "_": r"\_",
    "{": r"\{",
    "}": r"\}",
    "~": r"\textasciitilde{}",
    "^": r"\textasciicircum{}",
    "\n": r"\newline{}",
}

_MARKDOWN_ESCAPES = {
    "\\": "\\\\",
    "|": "\\|",
    "<": "\\<",
    "\n": "<br>",
}


def escape_latex(text: str) -> str:
    """
    Escape LaTeX special characters. Every backslash in the output starts an
    escape, so distinct inputs stay distinct.
    """
    return "".join(_LATEX_ESCAPES.get(ch, ch) for ch in text)


def escape_markdown(text: str) -> str:
    """
    Escape text for Markdown paragraphs and pipe-table cells.

    Backslash, pipe and `<` take a backslash, newlines become `<br>` and a
    leading `#` is escaped so it does not open a heading.
    """
    escaped = "".join(_MARKDOWN_ESCAPES.get(ch, ch) for ch in text)
    if text.startswith("#"):
        escaped = "\\" + escaped
    return escaped


# ---------------------------------------------------------------------------
# Markdown
# ---------------------------------------------------------------------------


def _md_item(item: ListItem) -> str:
    text = escape_markdown(item.text)
    if item.label is None:
        return f"- {text}"
    return f"- **{escape_markdown(item.label)}:** {text}"


def _md_table(table: Table) -> list[str]:
    def row(cells: tuple[str, ...]) -> str:
        return "| " + " | ".join(escape_markdown(c) for c in cells) + " |"

    lines = [row(table.headers), "| " + " | ".join("---" for _ in table.headers) + " |"]
    lines.extend(row(r) for r in table.rows)
    if table.caption:
        lines += ["", escape_markdown(table.caption)]
    return lines


def _md_block(block: Paragraph | BulletList | Table) -> list[str]:
    match block:
        case Paragraph(text=text):
            return [escape_markdown(text)]
        case BulletList(items=items):
            return [_md_item(i) for i in items]
        case Table():
            return _md_table(block)
    raise TypeError(f"Unknown block type: {type(block).__name__}")


def render_markdown(doc: ReportDocument) -> str:
    chunks: list[list[str]] = [[f"# {escape_markdown(doc.title)}"]]
    for level, section in doc.walk():
        chunks.append([f"{'#' * level} {escape_markdown(section.heading)}"])
        chunks.extend(_md_block(b) for b in section.blocks if _has_content(b))
    return "\n\n".join("\n".join(chunk) for chunk in chunks) + "\n"


# ---------------------------------------------------------------------------
# LaTeX
# ---------------------------------------------------------------------------

_LATEX_HEADINGS = {2: "section", 3: "subsection", 4: "subsubsection"}

_LATEX_PREAMBLE = r"""\documentclass{article}
\usepackage[utf8]{inputenc}
\usepackage[T1]{fontenc}
\usepackage[margin=2cm]{geometry}
"""


def _tex_table(table: Table) -> list[str]:
    def row(cells: tuple[str, ...]) -> str:
        return " & ".join(escape_latex(c) for c in cells) + r" \\"

    lines = [
        r"\begin{center}",
        r"{\small",
        r"\begin{tabular}{" + "l" * len(table.headers) + "}",
        r"\hline",
        row(table.headers),
        r"\hline",
    ]
    lines.extend(row(r) for r in table.rows)
    lines += [r"\hline", r"\end{tabular}", "}"]
    if table.caption:
        lines.append(r"\par " + escape_latex(table.caption))
    lines.append(r"\end{center}")
    return lines


def _tex_block(block: Paragraph | BulletList | Table) -> list[str]:
    match block:
        case Paragraph(text=text):
            return [escape_latex(text)]
        case BulletList(items=items):
            lines = [r"\begin{itemize}"]
            for item in items:
                label = "" if item.label is None else r"\textbf{" + escape_latex(item.label) + ":} "
                lines.append(r"\item " + label + escape_latex(item.text))
            lines.append(r"\end{itemize}")
            return lines
        case Table():
            return _tex_table(block)
    raise TypeError(f"Unknown block type: {type(block).__name__}")


def render_latex(doc: ReportDocument) -> str:
    chunks: list[list[str]] = [
        [_LATEX_PREAMBLE.rstrip("\n")],
        [
            r"\title{" + escape_latex(doc.title) + "}",
            r"\date{}",
            r"\begin{document}",
            r"\maketitle",
        ],
    ]
    for level, section in doc.walk():
        chunks.append([f"\\{_LATEX_HEADINGS[level]}*{{{escape_latex(section.heading)}}}"])
        chunks.extend(_tex_block(b) for b in section.blocks if _has_content(b))
    chunks.append([r"\end{document}"])
    return "\n\n".join("\n".join(chunk) for chunk in chunks) + "\n"


def _has_content(block: Paragraph | BulletList | Table) -> bool:
    # an empty itemize does not compile
    return not (isinstance(block, BulletList) and not block.items)


def render(doc: ReportDocument, target: RenderTarget | str) -> str:
    """
    Render a report document.

    Parameters
    ----------
    doc : ReportDocument
    target : RenderTarget | str
        `md` for Markdown with ATX headings and pipe tables, `tex` for a
        standalone LaTeX article with tabular tables.

    Returns
    -------
    str
        The document text, ending with one newline. Equal documents give
        equal text.

    Raises
    ------
    ValueError
        If the document is deeper than four heading levels.
    """
    doc.check()
    if RenderTarget(target) is RenderTarget.LATEX:
        return render_latex(doc)
    return render_markdown(doc)
