"""Testes de leitura/escrita Touchstone v1."""

import numpy as np
import pytest

from src.errors import TouchstoneParseError
from src.rfnet import FrequencyGrid, TwoPortRecord
from src.touchstone import (
    OptionLine,
    TouchstoneDocument,
    load_touchstone,
    parse_touchstone,
    save_touchstone,
    write_touchstone,
)

MA_EXAMPLE = """! amplificador de teste
# GHz S MA R 50
1.0 0.1 0 0.9 90 0.01 0 0.2 0
"""


def _random_doc(rng, fmt):
    n = int(rng.integers(1, 12))
    freqs = np.cumsum(rng.uniform(0.01, 1.0, n)) * 1e9
    mag = rng.uniform(1e-4, 2.0, (n, 2, 2))
    phase = rng.uniform(-np.pi, np.pi, (n, 2, 2))
    record = TwoPortRecord(FrequencyGrid(freqs), mag * np.exp(1j * phase))
    return TouchstoneDocument(OptionLine("GHz", "S", fmt, 50.0), record, ("gerado",))


class TestParse:
    def test_ma_example(self):
        doc = parse_touchstone(MA_EXAMPLE)
        assert doc.data.grid.points[0] == 1e9
        assert doc.data.s21[0] == pytest.approx(0.9j, abs=1e-15)
        assert doc.data.s11[0] == pytest.approx(0.1)
        assert doc.data.s12[0] == pytest.approx(0.01)
        assert doc.data.s22[0] == pytest.approx(0.2)
        assert doc.comments == ("amplificador de teste",)

    def test_db_row(self):
        doc = parse_touchstone("# GHz S DB R 50\n1.0 -20 0 -20 90 -40 0 -20 0\n")
        assert doc.data.s21[0] == pytest.approx(0.1j, abs=1e-15)

    def test_ri_and_units(self):
        doc = parse_touchstone("# MHz S RI R 75\n100 0.1 0.0 0.5 0.5 0 0 0.1 0.0\n")
        assert doc.data.grid.points[0] == 100e6
        assert doc.data.s21[0] == 0.5 + 0.5j
        assert doc.data.z_ref == 75.0

    def test_default_option_line(self):
        doc = parse_touchstone("1.0 0.1 0 0.9 90 0.01 0 0.2 0\n")
        assert doc.option_line == OptionLine()
        assert doc.data.s21[0] == pytest.approx(0.9j, abs=1e-15)

    def test_inline_comment(self):
        doc = parse_touchstone("# GHz S MA R 50\n1.0 0.1 0 0.9 90 0.01 0 0.2 0 ! ponto 1\n")
        assert len(doc.data.grid) == 1

    def test_noise_block(self):
        text = MA_EXAMPLE + "2.0 0.1 0 0.9 90 0.01 0 0.2 0\n1.0 0.5 0.3 45 0.2\n2.0 0.6 0.3 50 0.2\n"
        doc = parse_touchstone(text)
        assert len(doc.data.grid) == 2
        freqs, te = doc.te_table()
        np.testing.assert_allclose(freqs, [1e9, 2e9])
        assert te[0] == pytest.approx(290.0 * (10 ** 0.05 - 1), rel=1e-12)
        assert doc.noise.gamma_opt[0] == pytest.approx(0.3 * np.exp(1j * np.pi / 4))

    def test_bytes_input(self):
        doc = parse_touchstone(MA_EXAMPLE.encode())
        assert len(doc.data.grid) == 1


class TestParseErrors:
    @pytest.mark.parametrize(
        "text, line",
        [
            ("# GHz S MA R 50\n1.0 0.1 0 0.9 90 0.01 0 0.2\n", 2),
            ("# GHz S MA R 50\n2.0 0.1 0 0.9 90 0.01 0 0.2 0\n1.0 0.1 0 0.9 90 0.01 0 0.2 0 0\n", 3),
            ("# GHz S MA R 50\n1.0 0.1 0 0.9 90 0.01 0 0.2 0\n1.0 0.1 0 0.9 90 0.01 0 0.2 0\n", 3),
            ("! x\n# GHz S XX R 50\n", 2),
            ("# GHz Y MA R 50\n", 1),
            ("[Version] 2.0\n", 1),
            ("# GHz S MA R 50\n1.0 -0.1 0 0.9 90 0.01 0 0.2 0\n", 2),
            ("# GHz S MA R 50\n# GHz S RI R 50\n", 2),
            ("# GHz S MA R 50\n1.0 0.1 0 abc 90 0.01 0 0.2 0\n", 2),
            ("# GHz S MA R 50\n1.0 0.1 0 nan 90 0.01 0 0.2 0\n", 2),
            ("# GHz S MA R\n1.0 0.1 0 0.9 90 0.01 0 0.2 0\n", 1),
        ],
    )
    def test_line_number_reported(self, text, line):
        with pytest.raises(TouchstoneParseError) as exc:
            parse_touchstone(text)
        assert exc.value.line == line

    def test_no_data(self):
        with pytest.raises(TouchstoneParseError):
            parse_touchstone("! só comentário\n# GHz S MA R 50\n")

    def test_load_includes_path(self, tmp_path):
        path = tmp_path / "bad.s2p"
        path.write_text("# GHz S MA R 50\n1.0 0.1\n")
        with pytest.raises(TouchstoneParseError) as exc:
            load_touchstone(str(path))
        assert exc.value.path == str(path)
        assert exc.value.line == 2
        assert str(path) in str(exc.value)


class TestWrite:
    @pytest.mark.parametrize("fmt", ["RI", "MA", "DB"])
    def test_round_trip(self, fmt):
        rng = np.random.default_rng(11)
        for _ in range(1000):
            doc = _random_doc(rng, fmt)
            back = parse_touchstone(write_touchstone(doc))
            np.testing.assert_allclose(back.data.grid.points, doc.data.grid.points, rtol=1e-12)
            np.testing.assert_allclose(back.data.s, doc.data.s, rtol=1e-12, atol=0)
            assert back.comments == doc.comments
            assert back.option_line == doc.option_line

    def test_format_override(self):
        doc = parse_touchstone(MA_EXAMPLE)
        text = write_touchstone(doc, "DB")
        assert text.startswith("# GHz S DB R 50\n")
        np.testing.assert_allclose(parse_touchstone(text).data.s, doc.data.s, rtol=1e-12, atol=1e-15)

    def test_noise_block_survives(self, tmp_path):
        text = MA_EXAMPLE + "1.0 0.5 0.3 45 0.2\n"
        doc = parse_touchstone(text)
        path = save_touchstone(doc, str(tmp_path / "amp.s2p"))
        back = load_touchstone(path)
        np.testing.assert_allclose(back.noise.fmin_db, [0.5])
        np.testing.assert_allclose(back.noise.gamma_opt, doc.noise.gamma_opt, rtol=1e-12)


def _mutate(rng, text: str) -> str:
    alphabet = "0123456789.-+eE !#[]RSMADBIGHzk\n\t"
    chars = list(text)
    for _ in range(int(rng.integers(1, 6))):
        op = rng.integers(3)
        pos = int(rng.integers(len(chars) + 1))
        if op == 0 and chars:
            del chars[min(pos, len(chars) - 1)]
        elif op == 1:
            chars.insert(pos, alphabet[rng.integers(len(alphabet))])
        elif chars:
            chars[min(pos, len(chars) - 1)] = alphabet[rng.integers(len(alphabet))]
    return "".join(chars)


def _fuzz(n: int):
    rng = np.random.default_rng(1234)
    seeds = [
        MA_EXAMPLE,
        write_touchstone(_random_doc(rng, "RI")),
        write_touchstone(_random_doc(rng, "DB")),
        MA_EXAMPLE + "1.0 0.5 0.3 45 0.2\n",
    ]
    for k in range(n):
        text = _mutate(rng, seeds[k % len(seeds)])
        try:
            doc = parse_touchstone(text)
        except TouchstoneParseError as e:
            assert e.line >= 1
        else:
            assert np.all(np.isfinite(doc.data.s))


def test_fuzzed_input_never_crashes():
    _fuzz(2000)


@pytest.mark.slow
def test_fuzzed_input_never_crashes_full():
    _fuzz(100_000)
