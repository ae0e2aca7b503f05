"""PGMX parsing, serialization, and round-trip identity."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bnkit import (
    FormatError,
    NoisyOrPotential,
    TablePotential,
    joint_probability,
    parse_model,
    serialize_model,
    inspect_model,
)
from bnkit.network import all_assignments
from bnkit.pgmx import ModelDocument, format_number, networks_equal, FORMAT_VERSION

from conftest import random_dag, random_polytree

MINIMAL = b"""<?xml version="1.0" encoding="UTF-8"?>
<ProbModelXML formatVersion="1.0">
  <ProbNet type="BayesianNetwork">
    <Variables>
      <Variable name="x" type="finiteStates">
        <States><State name="false"/><State name="true"/></States>
      </Variable>
    </Variables>
    <Links></Links>
    <Potentials>
      <Potential type="Table" role="conditionalProbability">
        <Variables><Variable name="x"/></Variables>
        <Values>0.25 0.75</Values>
      </Potential>
    </Potentials>
  </ProbNet>
</ProbModelXML>
"""


class TestParse:
    def test_minimal_document(self):
        doc = parse_model(MINIMAL)
        assert len(doc.network) == 1
        np.testing.assert_allclose(doc.network.cpt("x"), [0.25, 0.75])

    def test_fixture_ici_expands_to_published_values(self, heart_attack_doc):
        table = heart_attack_doc.network.cpt("HeartAttackI")
        # rows of the 2-cause noisy OR with inhibitors 0.7 (A) and 0.6 (H)
        assert table[0, 0, 0] == pytest.approx(1.0, abs=1e-12)
        assert table[1, 0, 0] == pytest.approx(0.7, abs=1e-12)
        assert table[0, 1, 0] == pytest.approx(0.6, abs=1e-12)
        assert table[1, 1, 0] == pytest.approx(0.42, abs=1e-12)

    def test_canonical_form_retained(self, heart_attack_doc):
        net = heart_attack_doc.network
        potential = net.potentials[net.var_index("HeartAttackI")]
        assert isinstance(potential, NoisyOrPotential)
        assert potential.c == (0.3, 0.4)

    def test_unnormalized_values_error_with_location(self):
        bad = MINIMAL.replace(b"0.25 0.75", b"0.5 0.6")
        with pytest.raises(FormatError) as err:
            parse_model(bad)
        report = err.value.report
        assert "row-not-normalized" in report.error_codes()
        assert any("line" in f.location for f in report.errors)

    def test_malformed_xml(self):
        with pytest.raises(FormatError) as err:
            parse_model(b"<ProbModelXML>")
        assert err.value.code == "malformed-xml"
        assert "line" in (err.value.location or "")

    def test_unknown_element(self):
        bad = MINIMAL.replace(b"<Links></Links>", b"<Links></Links><Wat/>")
        _, report = inspect_model(bad)
        assert "unknown-element" in report.error_codes()

    def test_unknown_attribute(self):
        bad = MINIMAL.replace(b'type="finiteStates"', b'type="finiteStates" color="red"')
        _, report = inspect_model(bad)
        assert "unknown-attribute" in report.error_codes()

    def test_dangling_link(self):
        bad = MINIMAL.replace(
            b"<Links></Links>",
            b'<Links><Link directed="true"><Variable name="x"/>'
            b'<Variable name="ghost"/></Link></Links>',
        )
        _, report = inspect_model(bad)
        assert "dangling-link" in report.error_codes()

    def test_duplicate_potential(self):
        extra = b"""      <Potential type="Table" role="conditionalProbability">
        <Variables><Variable name="x"/></Variables>
        <Values>0.5 0.5</Values>
      </Potential>
    </Potentials>"""
        bad = MINIMAL.replace(b"    </Potentials>", extra)
        _, report = inspect_model(bad)
        assert "duplicate-potential" in report.error_codes()

    def test_table_length_mismatch(self):
        bad = MINIMAL.replace(b"0.25 0.75", b"0.25 0.7 0.05")
        _, report = inspect_model(bad)
        assert "table-size-mismatch" in report.error_codes()

    def test_unsupported_version(self):
        bad = MINIMAL.replace(b'formatVersion="1.0"', b'formatVersion="9.9"')
        with pytest.raises(FormatError) as err:
            parse_model(bad)
        assert err.value.code == "unsupported-version"

    def test_every_error_carries_location(self):
        bad = MINIMAL.replace(b"0.25 0.75", b"0.5 0.6")
        _, report = inspect_model(bad)
        assert report.errors
        for finding in report.errors:
            assert finding.location
            assert finding.code


class TestSerialize:
    def test_round_trip_fixture(self, heart_attack_doc):
        data = serialize_model(heart_attack_doc, expand=False)
        reparsed = parse_model(data)
        assert networks_equal(heart_attack_doc.network, reparsed.network)
        assert reparsed.provenance == heart_attack_doc.provenance

    def test_round_trip_is_fixed_point(self, heart_attack_doc):
        once = serialize_model(heart_attack_doc, expand=False)
        twice = serialize_model(parse_model(once), expand=False)
        assert once == twice

    def test_repeated_serialization_byte_identical(self, headache_doc):
        assert serialize_model(headache_doc) == serialize_model(headache_doc)

    def test_expanded_serialization_contains_published_numbers(
        self, heart_attack_doc
    ):
        text = serialize_model(heart_attack_doc, expand=True).decode()
        for number in ("0.42", "0.58", "0.7", "0.6"):
            assert number in text

    def test_expanded_and_canonical_same_joint(self, heart_attack_doc):
        canonical = parse_model(serialize_model(heart_attack_doc, expand=False))
        expanded = parse_model(serialize_model(heart_attack_doc, expand=True))
        for assignment in all_assignments(canonical.network):
            a = joint_probability(canonical.network, assignment)
            b = joint_probability(expanded.network, assignment)
            assert a == pytest.approx(b, abs=1e-12)

    def test_round_trip_random_networks(self):
        rng = np.random.default_rng(23)
        for k in range(25):
            net = (
                random_polytree(rng, max_nodes=6)
                if k % 2
                else random_dag(rng, max_nodes=6)
            )
            doc = ModelDocument(FORMAT_VERSION, net, provenance=f"random {k}")
            data = serialize_model(doc)
            reparsed = parse_model(data)
            assert networks_equal(net, reparsed.network)
            assert serialize_model(reparsed) == data

    def test_scientific_notation_accepted_on_input(self):
        doc = parse_model(MINIMAL.replace(b"0.25 0.75", b"2.5e-1 7.5e-1"))
        np.testing.assert_allclose(doc.network.cpt("x"), [0.25, 0.75])
        # output stays positional
        assert b"e-" not in serialize_model(doc)


class TestNumberFormat:
    @given(st.floats(min_value=0.0, max_value=1.0, allow_nan=False))
    @settings(max_examples=200, deadline=None)
    def test_shortest_decimal_round_trips(self, value):
        text = format_number(value)
        assert float(text) == value
        assert "e" not in text and "E" not in text

    def test_plain_decimals(self):
        assert format_number(0.5) == "0.5"
        assert format_number(1.0) == "1"
        assert format_number(0.00001) == "0.00001"
