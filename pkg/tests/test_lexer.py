"""Comment-aware lexing: string literals, triple quotes, stripping."""

from __future__ import annotations

import random

import pytest

from autogenics.lexer import scan_lines, strip_comments
from autogenics.model import Language
from oracles import strip_comments_oracle
from synth import inject_comments, make_snippet


class TestPythonStripping:
    def test_plain_trailing_comment(self):
        assert strip_comments("x = 1  # set x", Language.PYTHON) == "x = 1"

    def test_hash_inside_string_survives(self):
        code = 's = "#nope"  # real comment'
        assert strip_comments(code, Language.PYTHON) == 's = "#nope"'

    def test_single_quoted_string(self):
        code = "s = '#also nope'  # gone"
        assert strip_comments(code, Language.PYTHON) == "s = '#also nope'"

    def test_comment_only_line_dropped(self):
        assert strip_comments("# top note\nx = 1", Language.PYTHON) == "x = 1"

    def test_blank_comment_line_with_indent_dropped(self):
        assert strip_comments("    # note\nx = 1", Language.PYTHON) == "x = 1"

    def test_triple_quoted_hash_is_code(self):
        code = 'doc = """a # b\nc # d"""\ny = 2  # gone'
        assert strip_comments(code, Language.PYTHON) == 'doc = """a # b\nc # d"""\ny = 2'

    def test_triple_quote_interior_line_with_hash_kept(self):
        code = "s = '''\n# looks like a comment\n'''"
        assert strip_comments(code, Language.PYTHON) == code

    def test_escaped_quote_does_not_close_string(self):
        code = "s = 'a\\'b # in'  # out"
        assert strip_comments(code, Language.PYTHON) == "s = 'a\\'b # in'"

    def test_unterminated_string_consumes_line(self, caplog):
        code = "s = 'unterminated # not comment"
        with caplog.at_level("WARNING"):
            assert strip_comments(code, Language.PYTHON) == code
        assert any("unterminated" in m for m in caplog.messages)

    def test_unterminated_string_does_not_leak_to_next_line(self):
        code = "s = 'oops\ny = 1  # gone"
        assert strip_comments(code, Language.PYTHON) == "s = 'oops\ny = 1"

    def test_backslash_continued_string_spans_lines(self):
        code = "s = 'one \\\ntwo # still string'\nz = 1  # gone"
        assert strip_comments(code, Language.PYTHON) == "s = 'one \\\ntwo # still string'\nz = 1"

    def test_non_comment_bytes_preserved_exactly(self):
        code = "x\t=  1   \ny =2"
        assert strip_comments(code, Language.PYTHON) == code

    def test_crlf_normalized(self):
        assert strip_comments("a = 1  # x\r\nb = 2\r\n", Language.PYTHON) == "a = 1\nb = 2\n"


class TestJavaStripping:
    def test_plain_trailing_comment(self):
        assert strip_comments("int x = 1; // set x", Language.JAVA) == "int x = 1;"

    def test_url_inside_string_survives(self):
        code = 'String u = "http://a"; // link'
        assert strip_comments(code, Language.JAVA) == 'String u = "http://a";'

    def test_char_literal_with_escape(self):
        code = "char c = '\\''; // quote char"
        assert strip_comments(code, Language.JAVA) == "char c = '\\'';"

    def test_division_is_not_a_comment(self):
        code = "int r = a / b / c;"
        assert strip_comments(code, Language.JAVA) == code

    def test_comment_only_line_dropped(self):
        assert strip_comments("// header\nint x = 1;", Language.JAVA) == "int x = 1;"

    def test_slashes_inside_string_survive(self):
        code = 'String s = "a//b"; // strip me'
        assert strip_comments(code, Language.JAVA) == 'String s = "a//b";'


class TestScanLines:
    def test_trailing_comment_split(self):
        lines = scan_lines("x = 1  # note", Language.PYTHON)
        assert lines[0].code == "x = 1  "
        assert lines[0].comment == " note"

    def test_standalone_detection(self):
        lines = scan_lines("  # alone\nx = 1", Language.PYTHON)
        assert lines[0].is_standalone_comment
        assert not lines[1].is_standalone_comment

    def test_blank_detection(self):
        lines = scan_lines("\n   \nx=1", Language.PYTHON)
        assert lines[0].is_blank and lines[1].is_blank and not lines[2].is_blank

    def test_comment_marker_excluded_from_parts(self):
        lines = scan_lines("a; // b", Language.JAVA)
        assert lines[0].code == "a; "
        assert lines[0].comment == " b"


class TestOracleAgreement:
    @pytest.mark.parametrize("language", ["python", "java"])
    def test_random_snippets_match_oracle(self, language):
        rng = random.Random(20240 if language == "python" else 20241)
        lang = Language.PYTHON if language == "python" else Language.JAVA
        for _ in range(300):
            code = make_snippet(rng, language)
            with_comments = inject_comments(code, language, rng)
            assert strip_comments(with_comments, lang) == strip_comments_oracle(
                with_comments, language
            )

    def test_handcrafted_edge_cases_match_oracle(self):
        cases_py = [
            "",
            "#",
            "##",
            "x = '' # c",
            "x = ''''''",
            's = """"""',
            "a = 'b' + \"c\"  # mix",
            "t = '''x''' # after triple",
            "u = '''a\nb'''  # after multi",
            "v = '\\\\'  # escaped backslash then comment",
        ]
        for code in cases_py:
            assert strip_comments(code, Language.PYTHON) == strip_comments_oracle(code, "python")
        cases_java = [
            "",
            "//",
            "///",
            "int a = 1 / 2; // half",
            'String s = ""; // empty',
            "char q = '\"'; // double quote char",
            'String t = "\\\\"; // escaped backslash',
        ]
        for code in cases_java:
            assert strip_comments(code, Language.JAVA) == strip_comments_oracle(code, "java")
