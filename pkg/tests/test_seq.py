from __future__ import annotations

import pytest

from typecorpus.seq import (
    TokenSequencePair,
    align_types,
    normalize_tokens,
    render_tokens,
    sequence_pair,
)


def typed(src: str) -> list[tuple[str, str]]:
    pair = sequence_pair(src)
    return list(zip(pair.untyped_seq, pair.typed_seq))


@pytest.mark.parametrize(
    "src,tokens",
    [
        ("x = 42  # answer", ["x", "=", "[number]"]),
        ("s = 'hi'", ["s", "=", "[string]"]),
        ("def f(a: int): return a", ["def", "f", "(", "a", ":", "int", ")", ":", "return", "a"]),
        ("y = f'{x} and {z}'", ["y", "=", "[string]"]),
        ('z = """multi\nline"""\n', ["z", "=", "[string]"]),
        ("w = 1.5j + 0x1F", ["w", "=", "[number]", "+", "[number]"]),
    ],
)
def test_normalize_tokens(src, tokens):
    assert normalize_tokens(src) == tokens


def test_render_round_trip_is_idempotent():
    src = "a = 'x' + 3  # c\nif a:\n    b = [1, 2]\n"
    tokens = normalize_tokens(src)
    assert normalize_tokens(render_tokens(tokens)) == tokens


def test_align_types_flat():
    assert align_types(["x", "=", "[number]"], {"x": "int"}).typed_seq == ("int", "0", "0")
    assert align_types(["a", "+", "b"], {}).typed_seq == ("0", "0", "0")


def test_pair_length_checked():
    with pytest.raises(ValueError):
        TokenSequencePair(("a", "b"), ("0",))


def test_parameter_type_propagates_to_uses():
    pairs = typed("def f(a: int): return a")
    assert [t for tok, t in pairs if tok == "a"] == ["int", "int"]


def test_def_name_carries_return_type():
    pairs = typed("def f(a) -> List[ str ]:\n    return a\n")
    assert pairs[1] == ("f", "List[str]")
    assert all(t == "0" for tok, t in pairs if tok == "a")


def test_scopes_do_not_leak():
    src = (
        "x: int = 1\n"
        "def f(x: str):\n"
        "    return x\n"
        "def g():\n"
        "    return x\n"
        "class C:\n"
        "    y: bytes = b''\n"
        "    def m(self):\n"
        "        return y\n"
    )
    pairs = typed(src)
    xs = [t for tok, t in pairs if tok == "x"]
    assert xs == ["int", "str", "str", "int"]
    ys = [t for tok, t in pairs if tok == "y"]
    assert ys == ["bytes", "0"]


def test_comprehension_variable_shadows():
    pairs = typed("def f(v: int):\n    return [v for v in range(3)]\n")
    vs = [t for tok, t in pairs if tok == "v"]
    assert vs == ["int", "0", "0"]


def test_attribute_names_are_not_typed():
    pairs = typed("def f(a: int, o):\n    return o.a\n")
    assert [t for tok, t in pairs if tok == "a"] == ["int", "0"]


def test_non_ascii_source_aligns():
    src = "def f(naïve: str, b):\n    s = 'ü' + naïve\n    return s\n"
    pairs = typed(src)
    assert [t for tok, t in pairs if tok == "naïve"] == ["str", "str"]


def test_no_annotations_all_zero():
    pair = sequence_pair("import os\nprint(os.sep)\n")
    assert set(pair.typed_seq) == {"0"}
    untyped, typed_str = pair.as_strings()
    assert len(untyped.split(" ")) == len(typed_str.split(" "))
