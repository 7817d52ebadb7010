"""Pipeline core: parsing, preservation, noise filtering, mapping, generate."""

from __future__ import annotations

import random

import pytest

from autogenics.engine import (
    DEFAULT_NOISE_PATTERNS,
    AnnotatedSnippet,
    CommentEngine,
    CommentEntry,
    Mode,
    Placement,
    Preservation,
    filter_noise,
    is_noise_statement,
    map_comments,
    parse_llm_response,
    verify_preservation,
)
from autogenics.gateway import Gateway, MockProvider, ProviderConfig
from autogenics.lexer import strip_comments
from autogenics.model import Language, Snippet
from autogenics.quartiles import count_loc, quartile_of
from synth import inject_comments, make_snippet


def make_py_snippet(code: str, snippet_id: str = "s1", question_id: str = "q1") -> Snippet:
    loc = count_loc(code)
    return Snippet(snippet_id, code, Language.PYTHON, loc,
                   quartile_of(loc, Language.PYTHON), question_id, "a1")


class TestVerifyPreservation:
    def test_added_comment_is_verified(self):
        assert verify_preservation("x=1", "x=1  # assign", Language.PYTHON) is Preservation.VERIFIED

    def test_changed_statement_fails(self):
        assert verify_preservation("x=1", "x = 2  # assign", Language.PYTHON) is Preservation.FAILED

    def test_existing_comment_replaced_is_verified(self):
        assert (
            verify_preservation("x=1 # old", "x=1  # new", Language.PYTHON)
            is Preservation.VERIFIED
        )

    def test_whitespace_runs_collapse(self):
        assert (
            verify_preservation("a  =   1\nb=2", "a = 1  # set\nb=2", Language.PYTHON)
            is Preservation.VERIFIED
        )

    def test_blank_lines_ignored(self):
        assert (
            verify_preservation("a=1\nb=2", "a=1\n\n\nb=2  # tail", Language.PYTHON)
            is Preservation.VERIFIED
        )

    def test_reordered_lines_fail(self):
        assert verify_preservation("a=1\nb=2", "b=2\na=1", Language.PYTHON) is Preservation.FAILED

    def test_dropped_line_fails(self):
        assert verify_preservation("a=1\nb=2", "a=1", Language.PYTHON) is Preservation.FAILED

    def test_java_comment_added(self):
        assert (
            verify_preservation("int x = 1;", "int x = 1; // set", Language.JAVA)
            is Preservation.VERIFIED
        )


class TestParseLlmResponse:
    def test_fenced_with_language_word(self):
        assert parse_llm_response("```python\nx=1  # set\n```") == "x=1  # set"

    def test_passthrough(self):
        assert parse_llm_response("x=1  # set") == "x=1  # set"

    def test_leading_prose_then_fence(self):
        assert parse_llm_response("Here is the code:\n```\nx=1\n```") == "x=1"

    def test_unclosed_fence_runs_to_end(self):
        assert parse_llm_response("```java\nint a = 1;\nint b = 2;") == "int a = 1;\nint b = 2;"

    def test_prose_first_line_dropped_without_fence(self):
        raw = "Sure, comments added below.\nx = 1  # set x\ny = 2  # set y"
        assert parse_llm_response(raw) == "x = 1  # set x\ny = 2  # set y"

    def test_colon_line_not_treated_as_prose(self):
        raw = "for i in x:\n    f(i)"
        assert parse_llm_response(raw) == raw

    def test_empty_raises(self):
        with pytest.raises(ValueError):
            parse_llm_response("   \n ")

    def test_second_fence_ignored(self):
        raw = "```\nfirst\n```\nand\n```\nsecond\n```"
        assert parse_llm_response(raw) == "first"


class TestNoisePatterns:
    def test_every_keyword_in_exactly_one_pattern(self):
        seen: dict[str, int] = {}
        for pattern in DEFAULT_NOISE_PATTERNS:
            for keyword in pattern.keywords:
                seen[keyword] = seen.get(keyword, 0) + 1
        assert seen and all(count == 1 for count in seen.values())

    def test_token_anchored_not_substring(self):
        assert not is_noise_statement("importer = 1", Language.PYTHON)
        assert not is_noise_statement("classes = []", Language.PYTHON)
        assert not is_noise_statement("printable = f()", Language.PYTHON)
        assert not is_noise_statement("interest = 0.05;", Language.JAVA)
        assert not is_noise_statement("returned = call();", Language.JAVA)

    def test_keywords_match_with_indentation(self):
        assert is_noise_statement("    import os", Language.PYTHON)
        assert is_noise_statement("\treturn x;", Language.JAVA)

    def test_print_call_matches(self):
        assert is_noise_statement("print(x)", Language.PYTHON)
        assert is_noise_statement("print (x)", Language.PYTHON)

    def test_from_import_matches(self):
        assert is_noise_statement("from math import sqrt", Language.PYTHON)
        assert not is_noise_statement("fromage = 1", Language.PYTHON)

    def test_language_scope_respected(self):
        # declaration keywords are Java-scope only
        assert is_noise_statement("int x = 1;", Language.JAVA)
        assert not is_noise_statement("int = 1", Language.PYTHON)
        # access modifiers are Java-scope only
        assert is_noise_statement("public void f() {", Language.JAVA)
        assert not is_noise_statement("public = 3", Language.PYTHON)

    def test_compound_keywords(self):
        assert is_noise_statement("public class Foo {", Language.JAVA)
        assert is_noise_statement("System.out.println(x);", Language.JAVA)
        assert is_noise_statement("System.out.print(x);", Language.JAVA)


class TestFilterNoise:
    def test_import_trailing_comment_removed(self):
        assert (
            filter_noise("import os  # import the os module", Language.PYTHON)
            == "import os"
        )

    def test_return_comment_removed_java(self):
        assert filter_noise("return x; // return the result", Language.JAVA) == "return x;"

    def test_non_matching_line_untouched(self):
        code = "total += price  # accumulate running total"
        assert filter_noise(code, Language.PYTHON) == code

    def test_standalone_comment_above_noise_line_removed(self):
        code = "# bring in os\nimport os\nx = 1  # keep"
        assert filter_noise(code, Language.PYTHON) == "import os\nx = 1  # keep"

    def test_contiguous_preceding_block_removed(self):
        code = "# a\n  # b\nreturn x"
        assert filter_noise(code, Language.PYTHON) == "return x"

    def test_preceding_block_separated_by_blank_survives(self):
        code = "# kept note\n\nimport os"
        assert filter_noise(code, Language.PYTHON) == "# kept note\n\nimport os"

    def test_comment_above_non_noise_line_survives(self):
        code = "# explanation\ntotal = 0"
        assert filter_noise(code, Language.PYTHON) == code

    def test_idempotent(self):
        rng = random.Random(31)
        for _ in range(100):
            code = inject_comments(make_snippet(rng, "python"), "python", rng)
            once = filter_noise(code, Language.PYTHON)
            assert filter_noise(once, Language.PYTHON) == once

    def test_never_touches_code_tokens(self):
        rng = random.Random(32)
        for language, name in ((Language.PYTHON, "python"), (Language.JAVA, "java")):
            for _ in range(100):
                code = inject_comments(make_snippet(rng, name), name, rng)
                assert strip_comments(filter_noise(code, language), language) == strip_comments(
                    code, language
                )

    def test_marker_inside_string_is_not_a_comment(self):
        code = 'x = "import os  # fake"'
        assert filter_noise(code, Language.PYTHON) == code


class TestMapComments:
    def test_trailing_comment_maps_to_its_line(self):
        entries = map_comments("x=1  # set x", "x=1", Language.PYTHON)
        assert entries == [CommentEntry(1, "set x", Placement.TRAILING)]

    def test_preceding_comment_maps_to_next_code_line(self):
        entries = map_comments("# init counter\nx=0", "x=0", Language.PYTHON)
        assert entries == [CommentEntry(1, "init counter", Placement.PRECEDING)]

    def test_consecutive_preceding_comments_merge(self):
        entries = map_comments("# a\n# b\nx=0", "x=0", Language.PYTHON)
        assert entries == [CommentEntry(1, "a\nb", Placement.PRECEDING)]

    def test_lines_are_original_indices(self):
        original = "a=1\nb=2\nc=3"
        annotated = "a=1\n# about b\nb=2  # inline\nc=3"
        entries = map_comments(annotated, original, Language.PYTHON)
        assert (2, "about b", Placement.PRECEDING) == (
            entries[0].line, entries[0].text, entries[0].placement
        )
        assert (2, "inline", Placement.TRAILING) == (
            entries[1].line, entries[1].text, entries[1].placement
        )

    def test_annotated_blank_lines_do_not_shift_mapping(self):
        original = "a=1\nb=2"
        annotated = "a=1\n\nb=2  # two"
        entries = map_comments(annotated, original, Language.PYTHON)
        assert entries == [CommentEntry(2, "two", Placement.TRAILING)]

    def test_precondition_enforced(self):
        with pytest.raises(ValueError):
            map_comments("y=9", "x=1", Language.PYTHON)

    def test_entry_lines_inside_original_range(self):
        rng = random.Random(33)
        for _ in range(100):
            code = make_snippet(rng, "python")
            annotated = inject_comments(code, "python", rng)
            loc_total = len(code.split("\n"))
            for entry in map_comments(annotated, code, Language.PYTHON):
                assert 1 <= entry.line <= loc_total
                assert entry.text.strip()


def _engine_with(responses: list[str]) -> tuple[CommentEngine, MockProvider]:
    queue = list(responses)

    def respond(prompt: str) -> str:
        if not queue:
            raise AssertionError("mock ran out of scripted responses")
        return queue.pop(0)

    provider = MockProvider(responder=respond)
    gateway = Gateway(ProviderConfig(provider="mock", daily_quota=50), provider=provider)
    return CommentEngine(gateway), provider


class TestGenerate:
    def test_happy_path_plain(self):
        snippet = make_py_snippet("total = 0\nvalue = total")
        engine, provider = _engine_with(["```\ntotal = 0  # start\nvalue = total  # copy\n```"])
        result = engine.generate(snippet)
        assert result.preservation is Preservation.VERIFIED
        assert result.mode is Mode.PLAIN
        assert [c.text for c in result.comments] == ["start", "copy"]
        assert result.context_used is None

    def test_altered_code_three_times_falls_back(self):
        snippet = make_py_snippet("x = 1")
        engine, provider = _engine_with(["x = 2", "x = 3", "x = 4"])
        result = engine.generate(snippet)
        assert result.preservation is Preservation.FAILED
        assert result.annotated_code == snippet.code
        assert result.comments == ()
        assert len(provider.calls) == 3

    def test_repaired_on_second_attempt(self):
        snippet = make_py_snippet("x = 1")
        engine, provider = _engine_with(["x = 99", "x = 1  # fixed"])
        result = engine.generate(snippet)
        assert result.preservation is Preservation.REPAIRED
        assert [c.text for c in result.comments] == ["fixed"]

    def test_context_mode_requires_question(self):
        snippet = make_py_snippet("x = 1")
        engine, _ = _engine_with([])
        with pytest.raises(ValueError):
            engine.generate(snippet, mode=Mode.CONTEXT_AWARE)

    def test_context_mode_two_calls_and_context_recorded(self):
        snippet = make_py_snippet("x = 1")
        provider = MockProvider()
        provider.register("Extract the main context", "wants a counter")
        provider.register("considering the provided question context", "x = 1  # counter start")
        gateway = Gateway(ProviderConfig(provider="mock"), provider=provider)
        engine = CommentEngine(gateway)
        result = engine.generate(snippet, question="How to count?", mode=Mode.CONTEXT_AWARE)
        assert result.preservation is Preservation.VERIFIED
        assert result.context_used == "wants a counter"
        assert result.mode is Mode.CONTEXT_AWARE
        assert "wants a counter" in provider.calls[1]

    def test_context_cached_per_question(self):
        provider = MockProvider()
        provider.register("Extract the main context", "shared context")
        provider.register("considering the provided question context", "x = 1  # c")
        gateway = Gateway(ProviderConfig(provider="mock"), provider=provider)
        engine = CommentEngine(gateway)
        a = make_py_snippet("x = 1", snippet_id="s1", question_id="same-q")
        b = make_py_snippet("x = 1", snippet_id="s2", question_id="same-q")
        engine.generate(a, question="Q?", mode=Mode.CONTEXT_AWARE)
        engine.generate(b, question="Q?", mode=Mode.CONTEXT_AWARE)
        context_calls = [c for c in provider.calls if c.startswith("Extract the main context")]
        assert len(context_calls) == 1

    def test_noise_filtered_from_output(self):
        snippet = make_py_snippet("import os\nname = os.name")
        engine, _ = _engine_with(
            ["import os  # import the os module\nname = os.name  # read the platform name"]
        )
        result = engine.generate(snippet)
        assert result.annotated_code.split("\n")[0] == "import os"
        assert [c.text for c in result.comments] == ["read the platform name"]

    def test_annotated_snippet_json_shape(self):
        snippet = make_py_snippet("x = 1")
        engine, _ = _engine_with(["x = 1  # set"])
        data = engine.generate(snippet).to_json_dict()
        assert data["snippet_id"] == "s1"
        assert data["preservation"] == "verified"
        assert data["comments"] == [{"line": 1, "text": "set", "placement": "trailing"}]
