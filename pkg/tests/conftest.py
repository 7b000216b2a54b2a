import json
import pathlib

import pytest
from hypothesis import settings

from chorc import cc, parser

settings.register_profile("suite", deadline=None, max_examples=60)
settings.load_profile("suite")

ROOT = pathlib.Path(__file__).resolve().parent.parent
CORPUS = ROOT / "corpus"
GOLDEN = CORPUS / "golden"
UNPROJECTABLE = CORPUS / "unprojectable"


def load_manifest():
    return json.loads((CORPUS / "manifest.json").read_text())["programs"]


def memory_from_obj(obj) -> cc.Memory:
    ctor = {"int": cc.VInt, "str": cc.VStr, "bool": cc.VBool}
    return {pid: {var: ctor[v["kind"]](v["value"]) for var, v in store.items()}
            for pid, store in obj.items()}


def parse_corpus(name: str) -> parser.ParsedProgram:
    path = CORPUS / name
    return parser.parse(path.read_text(encoding="utf-8"), str(path))


def auth_program() -> cc.ChorProgram:
    """The distributed-authentication choreography, built directly as a term.

    This is the hand-checked reference AST; the parser test asserts that
    corpus/auth.chor parses to exactly this program.
    """
    L = cc.Label.LEFT
    R = cc.Label.RIGHT
    then = cc.Interaction(
        cc.Sel("Ip", "Server", L), "authOk",
        cc.Interaction(
            cc.Sel("Ip", "Client", L), "authOk",
            cc.Interaction(
                cc.Com("Server", cc.Opaque("makeToken"), "Client", "token"),
                "acceptToken", cc.End())))
    els = cc.Interaction(
        cc.Sel("Ip", "Server", R), "authFail",
        cc.Interaction(cc.Sel("Ip", "Client", R), "authFail", cc.End()))
    main = cc.Interaction(
        cc.Com("Client", cc.Var("credentials"), "Ip", "credentials"),
        "authenticate",
        cc.Cond("Ip", cc.Opaque("check(credentials)"), then, els))
    return cc.ChorProgram((), main)


@pytest.fixture(scope="session")
def corpus_manifest():
    return load_manifest()
