from __future__ import annotations

import json

import pytest

from citsgraph.bundled import bundled_environment, bundled_kb, bundled_scenario
from citsgraph.env import parse_environment
from citsgraph.state import WorldState

# Environment made of exactly the three example entity rows of the source
# data tables, plus the roads/networks they reference.
TABLE_ENV_DOC = {
    "roads": ["Road_1", "Road_2", "Road_3"],
    "networks": ["Network_C-ITS", "Network_Malware"],
    "obus": [
        {
            "id": "OBU_Vehicle_hyundai",
            "Loc_Road": "Road_1",
            "Con_Network": "Network_C-ITS",
            "Description": "Avante",
            "Destination": "Road_2",
            "System_Env": ["Linux Yocto", "USB"],
            "Command": ["Receive mal-information from RSU"],
            "Protocol": ["Ethernet", "Bluetooth", "WTP"],
        }
    ],
    "rsus": [
        {
            "id": "RSU_Streetlamp",
            "Loc_Road": "Road_3",
            "Con_Network": "Network_C-ITS",
            "Groups": "RSU_Indicate",
            "Description": "Street light",
            "System_Env": ["Azure RTOS OS version 2.1.14.1"],
            "Command": ["Send mal-information to OBU"],
            "Protocol": ["Ethernet", "WTP"],
        }
    ],
    "devices": [
        {
            "id": "Attacker_Device",
            "sub_id": "Attacker_PC",
            "Con_Network": "Network_Malware",
            "Groups": "Attacker",
            "Description": "공격을 수행하는 attacker pc",
            "System_Env": ["Windows 10", "Virtual Machine"],
            "Command": ["Virtual OBU Setting in Device"],
            "Protocol": ["Ethernet"],
        }
    ],
}


def table_env_document(**overrides) -> str:
    doc = json.loads(json.dumps(TABLE_ENV_DOC))
    doc.update(overrides)
    return json.dumps(doc, ensure_ascii=False)


@pytest.fixture(scope="session")
def table_env():
    return parse_environment(table_env_document())


@pytest.fixture(scope="session")
def env():
    return bundled_environment()


@pytest.fixture(scope="session")
def kb():
    return bundled_kb()


@pytest.fixture(scope="session")
def scenario(kb):
    return bundled_scenario(kb)


@pytest.fixture()
def initial(env):
    return WorldState(env=env)
