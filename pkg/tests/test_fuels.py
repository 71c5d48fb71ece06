import json

import pytest

from firegrid import fuels
from firegrid.errors import DomainError, ValidationError


@pytest.fixture(scope="module")
def catalog():
    return fuels.builtin_catalog()


def test_builtin_has_all_thirteen_models(catalog):
    assert set(catalog.entries) == set(range(1, 14))
    assert len(catalog.nonburnable_ids) >= 1


def test_builtin_short_grass_matches_published_table(catalog):
    # Published values: sigma 3500 1/ft, 0.74 ton/acre fine load, 1.0 ft
    # depth, 12% extinction moisture; cross-checked against the lb/ft^2
    # reproduction of the same table (0.034 lb/ft^2).
    m = catalog.entries[1]
    assert m.name == "short grass"
    assert m.sigma == 3500.0
    assert m.delta == 1.0
    assert m.mx == 0.12
    assert m.w0 == pytest.approx(0.74 * 2000.0 / 43560.0)
    assert m.w0 == pytest.approx(0.034, abs=5e-4)


@pytest.mark.parametrize("fid,lbft2,depth,mx", [
    (3, 0.138, 2.5, 0.25),
    (8, 0.069, 0.2, 0.30),
    (13, 0.322, 3.0, 0.25),
])
def test_builtin_spot_checks_against_second_reproduction(catalog, fid, lbft2, depth, mx):
    m = catalog.entries[fid]
    assert m.w0 == pytest.approx(lbft2, abs=5e-4)
    assert m.delta == depth
    assert m.mx == mx


def test_builtin_entries_satisfy_invariants(catalog):
    for m in catalog.entries.values():
        m.validate()
        assert m.sigma > 0 and m.w0 > 0 and m.delta > 0
        assert m.rho_p > 0 and m.heat_content > 0
        assert 0 < m.mx < 1


def test_nonburnable_ids_are_not_burnable(catalog):
    for code in catalog.nonburnable_ids:
        assert not catalog.is_burnable(code)
    assert catalog.is_burnable(1)


def test_model_for_nonburnable_is_domain_error(catalog):
    with pytest.raises(DomainError):
        catalog.model_for(fuels.NONBURNABLE_WATER)


def test_unknown_code_rejected(catalog):
    with pytest.raises(ValidationError):
        catalog.is_burnable(777)


def test_roundtrip_serialize_load(catalog):
    text = fuels.serialize_catalog(catalog)
    assert fuels.load_catalog(text) == catalog


def test_duplicate_id_rejected(catalog):
    doc = fuels.catalog_to_dict(catalog)
    doc["fuels"].append(dict(doc["fuels"][2]))
    with pytest.raises(ValidationError, match="duplicate"):
        fuels.catalog_from_dict(doc)


def test_out_of_range_mx_rejected(catalog):
    doc = fuels.catalog_to_dict(catalog)
    doc["fuels"][0]["mx"] = 1.5
    with pytest.raises(ValidationError, match="mx"):
        fuels.catalog_from_dict(doc)


def test_missing_key_names_offending_field(catalog):
    doc = fuels.catalog_to_dict(catalog)
    del doc["fuels"][4]["sigma"]
    with pytest.raises(ValidationError, match="sigma"):
        fuels.catalog_from_dict(doc)


def test_invalid_json_rejected():
    with pytest.raises(ValidationError):
        fuels.load_catalog("{not json")


def test_catalog_document_is_plain_json(catalog):
    doc = json.loads(fuels.serialize_catalog(catalog))
    assert doc["version"] == fuels.CATALOG_VERSION
    assert {"id", "name", "sigma", "w0", "delta", "rho_p", "mx", "heat_content"} \
        <= set(doc["fuels"][0])
