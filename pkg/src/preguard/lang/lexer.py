import logging

from dataclasses import dataclass
from enum import Enum

from .types import ParseError

logger = logging.getLogger(__name__)

KEYWORDS = frozenset({
    "class", "extends", "int", "bool", "void", "if", "else", "while", "for",
    "return", "throw", "try", "catch", "new", "instanceof", "true", "false",
    "null", "break",
})

# longest first so "<=" wins over "<"
OPERATORS = ("<=", ">=", "==", "!=", "&&", "||",
             "+", "-", "*", "/", "%", "<", ">", "!", "=",
             "(", ")", "{", "}", "[", "]", ";", ",", ".")


class TokenKind(Enum):
    """
    Lexical token categories
    """
    INT = 1
    IDENT = 2
    KEYWORD = 3
    OP = 4
    EOF = 5


@dataclass(frozen=True)
class Token:
    kind: TokenKind
    text: str
    line: int
    col: int

    def is_op(self, text: str) -> bool:
        return self.kind == TokenKind.OP and self.text == text

    def is_kw(self, text: str) -> bool:
        return self.kind == TokenKind.KEYWORD and self.text == text


def tokenize(text: str) -> list[Token]:
    """
    Split MiniLang source into tokens, dropping whitespace and // comments
    :param text  Source text
    :return      Token list terminated by an EOF token
    """
    tokens: list[Token] = []
    idx = 0
    line = 1
    line_start = 0

    while idx < len(text):
        ch = text[idx]
        col = idx - line_start + 1

        if ch == "\n":
            idx += 1
            line += 1
            line_start = idx
            continue

        if ch.isspace():
            idx += 1
            continue

        # line comment
        if text.startswith("//", idx):
            while idx < len(text) and text[idx] != "\n":
                idx += 1
            continue

        if ch.isdigit():
            end = idx
            while end < len(text) and text[end].isdigit():
                end += 1
            tokens.append(Token(TokenKind.INT, text[idx:end], line, col))
            idx = end
            continue

        if ch.isalpha() or ch == "_":
            end = idx
            while end < len(text) and (text[end].isalnum() or text[end] == "_"):
                end += 1
            word = text[idx:end]
            kind = TokenKind.KEYWORD if word in KEYWORDS else TokenKind.IDENT
            tokens.append(Token(kind, word, line, col))
            idx = end
            continue

        for op in OPERATORS:
            if text.startswith(op, idx):
                tokens.append(Token(TokenKind.OP, op, line, col))
                idx += len(op)
                break
        else:
            raise ParseError(f"unexpected character {ch!r}", line, col)

    tokens.append(Token(TokenKind.EOF, "", line, idx - line_start + 1))
    logger.debug(f"Tokenized {len(tokens)} tokens")
    return tokens
