import re

import pytest
from hypothesis import given, strategies as st

from tenet.ids import (
    EntityKind,
    EntityRef,
    REGISTERED_PREFIXES,
    generate_id,
    is_valid_id,
    parse_id,
)

ID_SHAPE = re.compile(r"^[a-z]+-[a-z2-7]{26}$")


def test_generated_ids_match_shape_and_prefix():
    for prefix in sorted(REGISTERED_PREFIXES):
        rendered = generate_id(prefix)
        assert ID_SHAPE.match(rendered)
        assert parse_id(rendered) == (prefix, rendered.split("-", 1)[1])
        assert parse_id(rendered, prefix)[0] == prefix


def test_unregistered_prefix_is_rejected():
    with pytest.raises(AssertionError):
        generate_id("bogus")


def test_ids_are_unique_at_scale():
    ids = {generate_id("ten") for _ in range(10_000)}
    assert len(ids) == 10_000


@pytest.mark.parametrize(
    "bad",
    ["", "ten", "ten-", "ten-SHOUTING", "ten-abc", "ten-" + "a" * 25, "ten-" + "1" * 26, "-abcdef"],
)
def test_malformed_ids_raise(bad):
    with pytest.raises(ValueError):
        parse_id(bad)
    assert not is_valid_id(bad)


def test_prefix_mismatch_raises():
    rendered = generate_id("usr")
    with pytest.raises(ValueError):
        parse_id(rendered, "grp")
    assert not is_valid_id(rendered, "grp")


@given(st.sampled_from(sorted(REGISTERED_PREFIXES)))
def test_parse_roundtrip_property(prefix):
    rendered = generate_id(prefix)
    got_prefix, body = parse_id(rendered)
    assert got_prefix == prefix
    assert f"{prefix}-{body}" == rendered


# -- entity refs ----------------------------------------------------------


def test_ref_render_parse_roundtrip():
    tenant = generate_id("ten")
    for ref in (
        EntityRef.tenant(tenant),
        EntityRef.user(tenant, generate_id("usr")),
        EntityRef.group(tenant, generate_id("grp")),
        EntityRef.service_account(tenant, generate_id("svc")),
        EntityRef.agent(tenant, generate_id("agt")),
    ):
        assert EntityRef.parse(ref.render()) == ref


def test_tenant_ref_local_id_invariant():
    tenant = generate_id("ten")
    assert EntityRef.tenant(tenant).local_id == tenant
    with pytest.raises(ValueError):
        EntityRef(EntityKind.TENANT, tenant, generate_id("ten"))


@pytest.mark.parametrize("bad", ["", "user", "user:t1", "robot:t1:x1", "user:t1:x1:extra"])
def test_malformed_refs_raise(bad):
    with pytest.raises(ValueError):
        EntityRef.parse(bad)


@given(
    st.sampled_from(list(EntityKind)),
    st.text(alphabet="abcdefghij234567-", min_size=1, max_size=40),
    st.text(alphabet="abcdefghij234567-", min_size=1, max_size=40),
)
def test_ref_roundtrip_property(kind, tenant_id, local_id):
    if kind is EntityKind.TENANT:
        local_id = tenant_id
    ref = EntityRef(kind, tenant_id, local_id)
    assert EntityRef.parse(ref.render()) == ref
