"""Prompt template rendering: wording anchors, substitution, determinism."""

from __future__ import annotations

import pytest

from autogenics import prompts


class TestGenerationPrompt:
    def test_contains_wording_anchor_and_code(self):
        prompt = prompts.build_generation_prompt("x=1")
        assert "Generate inline comments to explain what each part of the code does" in prompt
        assert "x=1" in prompt
        assert "It starts with // for Java and # for Python" in prompt
        assert "do not alter the existing code" in prompt

    def test_single_pass_substitution(self):
        prompt = prompts.build_generation_prompt("print('{CODE_SNIPPET}')")
        assert prompt.count("{CODE_SNIPPET}") == 1  # the literal survives

    def test_deterministic(self):
        assert prompts.build_generation_prompt("a\nb") == prompts.build_generation_prompt("a\nb")

    def test_empty_code_errors(self):
        with pytest.raises(ValueError):
            prompts.build_generation_prompt("   ")


class TestContextPrompt:
    def test_starts_with_wording_anchor(self):
        prompt = prompts.build_context_prompt("Why NPE?")
        assert prompt.startswith(
            "Extract the main context and key points from the following question description"
        )
        assert "Why NPE?" in prompt

    def test_whitespace_only_errors(self):
        with pytest.raises(ValueError):
            prompts.build_context_prompt(" \n ")


class TestContextAwarePrompt:
    def test_contains_code_and_context(self):
        prompt = prompts.build_context_aware_prompt("y = f(x)", "solves a maze")
        assert "considering the provided question context" in prompt
        assert "y = f(x)" in prompt
        assert "solves a maze" in prompt
        assert "only generate inline comments" in prompt

    def test_empty_arguments_error(self):
        with pytest.raises(ValueError):
            prompts.build_context_aware_prompt("", "context")
        with pytest.raises(ValueError):
            prompts.build_context_aware_prompt("code", "")


class TestTemplates:
    def test_each_placeholder_appears_exactly_once(self):
        assert prompts.template_text("generation").count("{CODE_SNIPPET}") == 1
        assert prompts.template_text("context_extraction").count("{QUESTION_DESCRIPTION}") == 1
        aware = prompts.template_text("context_aware")
        assert aware.count("{CODE_SNIPPET}") == 1
        assert aware.count("{CODE_CONTEXT}") == 1

    def test_no_placeholders_survive_rendering(self):
        for rendered in (
            prompts.build_generation_prompt("plain code"),
            prompts.build_context_prompt("plain question"),
            prompts.build_context_aware_prompt("plain code", "plain context"),
        ):
            for name in ("{CODE_SNIPPET}", "{QUESTION_DESCRIPTION}", "{CODE_CONTEXT}"):
                assert name not in rendered

    def test_unknown_template_kind(self):
        with pytest.raises(KeyError):
            prompts.template_text("haiku")
