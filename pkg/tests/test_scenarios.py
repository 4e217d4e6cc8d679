import pytest

from tenet.scenarios import SCENARIO_NAMES, Fault, run_scenario

from support import OPERATOR_KEY

BASE = "http://testserver"

EXPECTED_STEPS = {
    "htrc-login": 7,
    "htrc-capsule": 8,
    "mft-agent": 6,
    "mft-delegated": 5,
    "mft-user": 4,
    "galaxy-federation": 5,
}


def run(client, name, fault=None):
    return run_scenario(name, BASE, OPERATOR_KEY, fault=fault, client=client)


def test_scenario_names_cover_expectations():
    assert set(SCENARIO_NAMES) == set(EXPECTED_STEPS)


@pytest.mark.parametrize("name", SCENARIO_NAMES)
def test_clean_run_passes_with_expected_step_count(client, name):
    transcript = run(client, name)
    assert transcript.ok, transcript.render()
    assert len(transcript.steps) == EXPECTED_STEPS[name]
    assert all(step.outcome == "PASS" for step in transcript.steps)


def test_transcript_rendering(client):
    transcript = run(client, "mft-user")
    lines = transcript.lines()
    assert lines[0] == "SCENARIO mft-user"
    assert lines[-1] == "RESULT PASS mft-user"
    steps = [l for l in lines if l.startswith("STEP ")]
    assert len(steps) == 4
    assert steps[0].startswith("STEP 1 PASS ")


def test_unknown_scenario_rejected(client):
    with pytest.raises(ValueError):
        run(client, "no-such-flow")


# -- fault localization -------------------------------------------------------------
#
# Each fault corrupts one artifact mid-run; the run must fail at exactly the
# first step that consumes the artifact, and the transcript stops there.


def assert_fails_at(transcript, step):
    assert not transcript.ok
    assert transcript.failed_step == step, transcript.render()
    assert len(transcript.steps) == step  # nothing executes past the failure
    assert transcript.steps[-1].outcome == "FAIL"
    assert f"RESULT FAIL {transcript.scenario}" in transcript.lines()[-1]


def corrupt(path):
    """Fault action replacing a nested ctx.state value with garbage."""

    def apply(ctx):
        target = ctx.state
        for key in path[:-1]:
            target = target[key]
        target[path[-1]] = "corrupted-artifact"

    return apply


def test_login_corrupt_authorize_url(client):
    fault = Fault(2, corrupt(["begun", "authorize_url"]), "authorize URL corrupted")
    transcript = run(client, "htrc-login", fault)
    assert_fails_at(transcript, 3)
    assert "fault injected after step 2" in "\n".join(transcript.header)


def test_login_corrupt_broker_state(client):
    fault = Fault(5, corrupt(["begun", "state"]), "broker state corrupted")
    assert_fails_at(run(client, "htrc-login", fault), 6)


def test_login_tenant_deactivated_midflight(client, service):
    def deactivate(ctx):
        service.tenants.deactivate_tenant(ctx.state["tenant"]["tenant_id"],
                                          operator_key=OPERATOR_KEY)

    transcript = run(client, "htrc-login", Fault(5, deactivate, "tenant deactivated"))
    assert_fails_at(transcript, 6)


def test_capsule_corrupt_capsule_id(client):
    fault = Fault(5, corrupt(["toolkit_request", "capsule_id"]), "capsule id corrupted")
    assert_fails_at(run(client, "htrc-capsule", fault), 6)


def test_capsule_service_account_deleted(client, service):
    def drop_account(ctx):
        service.service_accounts.delete(ctx.state["tenant"]["tenant_id"],
                                        ctx.state["account_id"])

    transcript = run(client, "htrc-capsule", Fault(4, drop_account, "service account deleted"))
    assert_fails_at(transcript, 7)


def test_agent_corrupt_task_credential(client):
    fault = Fault(3, corrupt(["agent_task", "credential_token"]), "task credential corrupted")
    assert_fails_at(run(client, "mft-agent", fault), 5)


def test_agent_corrupt_secret(client):
    fault = Fault(3, corrupt(["agent", "secret"]), "agent secret corrupted")
    assert_fails_at(run(client, "mft-agent", fault), 4)


def test_agent_share_revoked_midflight(client, service):
    from tenet.ids import EntityRef

    def revoke(ctx):
        tenant_id = ctx.state["tenant"]["tenant_id"]
        owner = EntityRef.user(tenant_id, ctx.state["tokens"]["user_id"])
        agent_ref = EntityRef.agent(tenant_id, ctx.state["agent"]["agent_id"])
        service.vault.revoke_share(owner, ctx.state["cred"], agent_ref)

    transcript = run(client, "mft-agent", Fault(4, revoke, "agent share revoked"))
    assert_fails_at(transcript, 5)


def test_delegated_corrupt_middleware_credentials(client):
    def swap(ctx):
        ctx.state["middleware_creds"] = (ctx.state["middleware_creds"][0], "wrong-secret")

    assert_fails_at(run(client, "mft-delegated", Fault(2, swap, "middleware secret corrupted")), 3)


def test_delegated_corrupt_fetched_bytes(client):
    def swap(ctx):
        ctx.state["fetched"] = b"corrupted-bytes"

    assert_fails_at(run(client, "mft-delegated", Fault(3, swap, "payload corrupted in transit")), 5)


def test_user_scheme_corrupt_bearer(client):
    fault = Fault(2, corrupt(["mft_request", "user_token"]), "user token corrupted")
    assert_fails_at(run(client, "mft-user", fault), 3)


def test_federation_user_disabled_midflight(client, service):
    def disable(ctx):
        tenant_id = ctx.state["tenant"]["tenant_id"]
        service.users.set_user_enabled(tenant_id, ctx.state["session_a"]["user_id"], False)

    transcript = run(client, "galaxy-federation", Fault(2, disable, "user disabled"))
    assert_fails_at(transcript, 3)


def test_federation_corrupt_credential_token(client):
    fault = Fault(3, corrupt(["cred"]), "credential token corrupted")
    assert_fails_at(run(client, "galaxy-federation", fault), 4)
