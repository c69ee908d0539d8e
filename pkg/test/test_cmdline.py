# -*- coding: utf-8 -*-
# Copyright 2014 The mrkit authors. See LICENSE file for details.


"""
Command line interface tests (execution through shell).
"""


import os
import sys
import json
import configparser
import logging
from clitest import CmdlineInterfaceTest


from pytest import mark


sys.path.insert(0, os.path.abspath('..'))
from mrkit.main import __version__, config_load
from mrkit.series import set_truncation, get_truncation


log = logging.getLogger("test_cmdline")


TESTDIR = os.path.dirname(os.path.abspath(__file__))
RUNDIRTOP = os.path.join(TESTDIR, "cmdline-test")
MRKIT_RUNNER = sys.executable + " ../../../mrkit-runner.py"
# On CI, `python setup.py install` has been executed before and the `mrkit`
# command must be available.
if os.environ.get("CI") == "true":
    MRKIT_RUNNER = "mrkit"
DATADIR = os.path.join(TESTDIR, "data")


class CLITest(CmdlineInterfaceTest):
    rundirtop = RUNDIRTOP
    # Set PYTHONIOENCODING. When connected to pipes (as in the context of
    # py.test), sys.stdout.encoding is None otherwise.
    preamble_lines = ['export PYTHONIOENCODING="utf-8"']


logging.basicConfig(
    format='%(asctime)s,%(msecs)-6.1f %(funcName)s# %(message)s',
    datefmt='%H:%M:%S')
logging.getLogger().setLevel(logging.DEBUG)


class Base(object):
    """Implement methods shared by all test classes."""

    def setup_method(self, method):
        testname = "%s_%s" % (type(self).__name__, method.__name__)
        print("\n\n%s" % testname)
        self.clitest = CLITest(testname)
        self.rundir = self.clitest.rundir

    def run(self, arguments, rc=0):
        cmd = "%s %s" % (MRKIT_RUNNER, arguments)
        log.info("Test command:\n%s", cmd)
        self.clitest.run(cmd, expect_rc=rc)
        return self.clitest

    def data(self, name):
        """Copy data file `name` into the run directory, return its name."""
        return self.clitest.copy_file(os.path.join(DATADIR, name))

    def config(self, doc, name="config.json"):
        self.clitest.add_file(name, json.dumps(doc).encode("utf-8"))
        return name


class TestArgparseFeatures(Base):
    """Make sure that argparse is set up properly."""

    def test_version(self):
        t = self.run("--version")
        t.assert_no_stderr()
        t.assert_is_stdout("%s%s" % (__version__, os.linesep))

    def test_help(self):
        t = self.run("--help")
        t.assert_in_stdout(["usage", "COMMAND", "verify", "npoint"])
        t.assert_no_stderr()

    def test_extended_help(self):
        t = self.run("--extended-help")
        t.assert_in_stdout(["Input:", "Output:", "Negative controls:",
            "Exit status:"])
        t.assert_no_stderr()

    def test_subcommand_help(self):
        t = self.run("npoint --help")
        t.assert_in_stdout(["--method", "--imax", "--data"])


class TestArgumentErrors(Base):
    """Invalid command lines exit with code 2 and leave stdout empty."""

    def test_no_command(self):
        t = self.run("", rc=2)
        t.assert_in_stderr("COMMAND")
        t.assert_no_stdout()

    def test_unknown_task(self):
        t = self.run("verify resolvent foo", rc=2)
        t.assert_in_stderr("Unknown task 'foo'")
        t.assert_no_stdout()

    def test_unknown_fault(self):
        t = self.run("verify --fault nothing", rc=2)
        t.assert_in_stderr("--fault")

    def test_negative_order(self):
        t = self.run("resolvent --order -1", rc=2)
        t.assert_in_stderr("--order must not be negative")
        t.assert_no_stdout()

    def test_xi_order_too_low(self):
        t = self.run("wave --data %s --xi-order 2" % self.data("data2.json"),
            rc=2)
        t.assert_in_stderr("--xi-order must be at least 4")

    def test_wave_without_data(self):
        t = self.run("wave", rc=2)
        t.assert_in_stderr("needs initial data")
        t.assert_no_stdout()

    def test_npoint_without_data(self):
        t = self.run("npoint --k 3", rc=2)
        t.assert_in_stderr("needs initial data")

    def test_bad_k(self):
        t = self.run("npoint --data %s --k 5 --method mr"
            % self.data("data1.json"), rc=2)
        t.assert_in_stderr("k must be between 2 and 4")
        t.assert_no_stdout()


class TestConfiguration(Base):
    """Configuration documents are validated before anything is computed."""

    def test_malformed(self):
        t = self.run("wave --data %s" % self.data("malformed.json"), rc=2)
        t.assert_in_stderr(["Invalid configuration", "malformed.json",
            "line 5"])
        t.assert_no_stdout()

    def test_missing_file(self):
        t = self.run("omega --data nofile.json", rc=2)
        t.assert_in_stderr(["Cannot read", "nofile.json"])

    def test_zero_q_for_waves(self):
        t = self.run("verify --data %s" % self.data("qzero.json"), rc=2)
        t.assert_in_stderr(["field 'q'", "constant term vanishes"])
        t.assert_no_stdout()

    def test_zero_q_wave_command(self):
        t = self.run("wave --data %s" % self.data("qzero.json"), rc=2)
        t.assert_in_stderr("constant term vanishes")

    def test_zero_q_symbolic_tasks(self):
        # Without wave tasks the slice only has to parse.
        t = self.run("omega --data %s --imax 0 --jmax 0 --json"
            % self.data("qzero.json"))
        assert t.stdout_json() == {"(0,0)": {"X^1": "1"}}

    def test_unknown_field(self):
        name = self.config({"q": [], "r": [], "colour": "blue"})
        t = self.run("omega --data %s" % name, rc=2)
        t.assert_in_stderr("field 'colour': unknown field")

    def test_missing_r(self):
        name = self.config({"q": [[0, 0, "1"]]})
        t = self.run("omega --data %s" % name, rc=2)
        t.assert_in_stderr("field 'r': missing")

    def test_bad_rational(self):
        name = self.config({"q": [[0, 0, "one"]], "r": []})
        t = self.run("omega --data %s" % name, rc=2)
        t.assert_in_stderr("field 'q[0]': invalid rational")

    def test_bad_triple(self):
        name = self.config({"q": [[0, "1"]], "r": []})
        t = self.run("omega --data %s" % name, rc=2)
        t.assert_in_stderr("field 'q[0]': must be a triple")

    def test_truncation_too_low(self):
        name = self.config({"q": [[0, 0, "1"]], "r": [],
            "truncation": {"n_xi": 2}})
        t = self.run("omega --data %s" % name, rc=2)
        t.assert_in_stderr("field 'truncation.n_xi': must be >= 4")

    def test_negative_bound(self):
        name = self.config({"q": [[0, 0, "1"]], "r": [],
            "bounds": {"npoint2": -1}})
        t = self.run("verify --data %s" % name, rc=2)
        t.assert_in_stderr(
            "field 'bounds.npoint2': must be a non-negative integer")

    def test_high_bounds_with_low_n_xi(self):
        name = self.config({"q": [[0, 0, "1"]], "r": [[0, 0, "1"]],
            "truncation": {"n_xi": 4}, "tasks": ["npoint"],
            "bounds": {"npoint2": 2, "npoint3": 1}, "output": "json"})
        t = self.run("verify --data %s" % name)
        doc = t.stdout_json()
        assert doc["status"] == "pass"
        windows = [c["window"] for c in doc["checks"]
            if c["identity"] == "3-point: wave functions = resolvent"]
        assert windows and windows[0].startswith("indices <= 1")

    def test_unknown_bound(self):
        name = self.config({"q": [[0, 0, "1"]], "r": [],
            "bounds": {"npoint5": 1}})
        t = self.run("verify --data %s" % name, rc=2)
        t.assert_in_stderr("field 'bounds.npoint5': unknown bound")

    def test_unknown_output_mode(self):
        name = self.config({"q": [[0, 0, "1"]], "r": [], "output": "xml"})
        t = self.run("omega --data %s" % name, rc=2)
        t.assert_in_stderr("field 'output'")


class TestConfigLoad(object):
    """Load configuration documents in-process."""

    def teardown_method(self, method):
        set_truncation(n_x=12, n_xi=8, eps_ceiling=8)

    def load(self, name):
        return config_load(os.path.join(
            os.path.dirname(os.path.abspath(__file__)), DATADIR, name))

    def test_missing_truncation_gives_defaults(self):
        set_truncation(n_x=5, n_xi=5, eps_ceiling=3)
        config = self.load("notruncation.json")
        t = get_truncation()
        assert (t.n_x, t.n_xi, t.eps_ceiling) == (12, 8, 8)
        assert config.truncation is t

    def test_partial_truncation(self, tmpdir):
        set_truncation(n_x=5, n_xi=5, eps_ceiling=3)
        path = tmpdir.join("partial.json")
        path.write(json.dumps({"q": [[0, 0, "1"]], "r": [],
            "truncation": {"n_xi": 6}}))
        t = config_load(str(path)).truncation
        assert (t.n_x, t.n_xi, t.eps_ceiling) == (12, 6, 8)

    def test_default_bounds(self):
        config = self.load("notruncation.json")
        b = config.bounds
        assert (b["npoint2"], b["npoint3"]) == (3, 2)
        assert b["omega"] == 4
        assert (b["rank_one_xi"], b["rank_one_x"]) == (6, 8)


class TestPackaging(object):
    def test_slow_marker_registered(self):
        cfg = configparser.ConfigParser()
        cfg.read(os.path.join(os.path.dirname(os.path.abspath(__file__)),
            "..", "setup.cfg"))
        assert not cfg.has_section("pytest")
        assert "slow:" in cfg.get("tool:pytest", "markers")


class TestSymbolicCommands(Base):
    def test_resolvent_text(self):
        t = self.run("resolvent --order 1")
        t.assert_in_stdout(["A_0 = 0", "B_0 = q0", "A_1 = 1/2·q0·r0"])
        t.assert_no_stderr()

    def test_resolvent_at_data(self):
        t = self.run("resolvent --data %s --order 1 --json"
            % self.data("data1.json"))
        doc = t.stdout_json()
        assert doc["order"] == 1
        assert doc["A"][1] == {"X^0": "1/2"}

    def test_resolvent_symbolic_flag(self):
        t = self.run("resolvent --data %s --order 1 --symbolic --json"
            % self.data("data1.json"))
        assert t.stdout_json()["B"][0] == [
            {"monomial": [["q", 0, 1]], "coeff": "1"}]

    def test_flows(self):
        t = self.run("flows --order 1 --json")
        doc = t.stdout_json()
        assert sorted(doc) == ["P_0", "P_1"]
        assert doc["P_0"]["q"] == [{"monomial": [["q", 1, 1]], "coeff": "1"}]

    def test_flows_text(self):
        t = self.run("flows --order 0")
        t.assert_is_stdout("dq/dt_0 = q1\ndr/dt_0 = r1\n")

    def test_omega_json(self):
        t = self.run("omega --imax 1 --jmax 1 --json")
        doc = t.stdout_json()
        assert sorted(doc) == ["(0,0)", "(0,1)", "(1,0)", "(1,1)"]
        assert doc["(0,0)"] == [{"monomial": [["q", 0, 1], ["r", 0, 1]],
            "coeff": "1"}]
        assert doc["(0,1)"] == doc["(1,0)"]

    def test_omega_text(self):
        t = self.run("omega --imax 0 --jmax 0")
        t.assert_is_stdout("Omega(0,0) = q0·r0\n")

    def test_omega_at_data(self):
        t = self.run("omega --data %s --imax 1 --jmax 1 --json"
            % self.data("notruncation.json"))
        assert t.stdout_json()["(0,0)"] == {"X^0": "1", "X^2": "-1"}

    def test_out_file(self):
        t = self.run("omega --imax 0 --jmax 0 --out result.txt")
        t.assert_no_stdout()
        t.assert_paths_exist("result.txt")
        assert t.read_file("result.txt") == "Omega(0,0) = q0·r0\n".encode(
            "utf-8")

    def test_recursion_fault_detected(self):
        t = self.run("resolvent --order 2 --fault recursion", rc=1)
        t.assert_in_stderr("eps*A_j' = r*B_j + q*C_j")
        t.assert_no_stdout()


class TestSliceCommands(Base):
    def test_npoint_mr(self):
        t = self.run("npoint --data %s --k 2 --imax 1 --method mr --json"
            % self.data("small.json"))
        doc = t.stdout_json()
        assert doc["(0,0)"] == {"X^0": "1", "X^2": "-1"}
        assert doc["(0,1)"] == doc["(1,0)"]

    def test_npoint_three_mr(self):
        t = self.run("npoint --data %s --k 3 --imax 0 --method mr --json"
            % self.data("small.json"))
        assert t.stdout_json() == {"(0,0,0)": {"X^1": {"eps^1": "-2"}}}

    def test_npoint_both(self):
        t = self.run("npoint --data %s --k 2 --imax 1 --json"
            % self.data("small.json"))
        doc = t.stdout_json()
        assert doc["comparison"] == {"left": "mr", "right": "wave",
            "status": "pass"}
        assert doc["mr"]["(0,0)"] == {"X^0": "1", "X^2": "-1"}

    def test_npoint_kernel_fault(self):
        t = self.run("npoint --data %s --k 2 --imax 1 --fault kernel-sign "
            "--json" % self.data("small.json"), rc=1)
        t.assert_in_stdout('"status": "fail"')

    def test_wave(self):
        t = self.run("wave --data %s --json" % self.data("small.json"))
        doc = t.stdout_json()
        assert doc["normalized"] is True
        assert doc["d"] == {"xi^1": {"X^0": "-2"}}

    def test_wave_text(self):
        t = self.run("wave --data %s" % self.data("small.json"))
        t.assert_in_stdout(["phi_A = ", "phi_B = ", "d = "])


class TestVerify(Base):
    def test_pass(self):
        t = self.run("verify --data %s" % self.data("small.json"))
        t.assert_no_stderr()
        doc = t.stdout_json()
        assert doc["status"] == "pass"
        assert "failure" not in doc
        groups = set(c["group"] for c in doc["checks"])
        assert groups == set(["resolvent", "flows", "omega", "wave",
            "npoint"])
        assert doc["notes"]["correlators_zero"] is False
        assert doc["notes"]["omega_k0_equals_2^k_A_k"]["0"] is False
        assert doc["config"]["label"] == "DATA2-small"

    def test_byte_stable(self):
        name = self.data("small.json")
        self.run("verify --data %s --out first.json" % name)
        t = self.run("verify --data %s --out second.json" % name)
        assert t.read_file("first.json") == t.read_file("second.json")

    def test_task_subset(self):
        t = self.run("verify resolvent omega --data %s"
            % self.data("small.json"))
        doc = t.stdout_json()
        assert doc["config"]["tasks"] == ["resolvent", "omega"]
        assert set(c["group"] for c in doc["checks"]) == set(
            ["resolvent", "omega"])

    def test_seed_override(self):
        t = self.run("verify resolvent --data %s --seed 7"
            % self.data("small.json"))
        assert t.stdout_json()["notes"]["seed"] == 7

    def test_text_output(self):
        name = self.config({"q": [[0, 0, "1"], [1, 0, "1"]],
            "r": [[0, 0, "1"], [1, 0, "-1"]], "truncation": {"n_xi": 4},
            "tasks": ["omega"], "bounds": {"omega": 1}})
        t = self.run("verify --data %s" % name)
        t.assert_in_stdout(["mrkit verify: PASS", "Omega_ij = Omega_ji",
            "note: omega_at_data_zero: False"])

    def test_fault_recursion(self):
        t = self.run("verify --data %s --fault recursion"
            % self.data("small.json"), rc=1)
        doc = t.stdout_json()
        assert doc["status"] == "fail"
        assert doc["failure"]["group"] == "resolvent"

    def test_fault_a_entry(self):
        t = self.run("verify --data %s --fault a-entry"
            % self.data("small.json"), rc=1)
        doc = t.stdout_json()
        assert doc["failure"]["group"] == "npoint"
        assert doc["failure"]["identity"] == \
            "2-point: wave functions = resolvent"

    def test_fault_kernel_sign(self):
        t = self.run("verify --data %s --fault kernel-sign"
            % self.data("small.json"), rc=1)
        assert t.stdout_json()["failure"]["group"] == "npoint"

    @mark.slow
    def test_data2_defaults(self):
        t = self.run("verify --data %s --json" % self.data("data2.json"))
        doc = t.stdout_json()
        assert doc["status"] == "pass"
        assert doc["results"]["calibration"]["validated_k3"] is True

    @mark.slow
    def test_data1_defaults(self):
        name = self.data("data1.json")
        self.run("verify --data %s --json --out first.json" % name)
        t = self.run("verify --data %s --json --out second.json" % name)
        assert t.read_file("first.json") == t.read_file("second.json")
        doc = json.loads(t.read_file("first.json").decode("utf-8"))
        assert doc["status"] == "pass"
        b = doc["config"]["bounds"]
        assert (b["npoint2"], b["npoint3"], b["omega"]) == (3, 2, 4)
        windows = dict((c["identity"], c["window"]) for c in doc["checks"])
        assert windows["3-point: wave functions = resolvent"].startswith(
            "indices <= 2")
        assert windows["2-point: wave functions = resolvent"].startswith(
            "indices <= 3")

    @mark.slow
    def test_vanishing_r(self):
        t = self.run("verify --data %s --json" % self.data("rzero.json"))
        doc = t.stdout_json()
        assert doc["status"] == "pass"
        assert doc["notes"]["correlators_zero"] is True
        assert doc["notes"]["affine_coefficients_zero"] is True

    @mark.slow
    def test_symbolic_defaults(self):
        t = self.run("verify --json")
        doc = t.stdout_json()
        assert doc["status"] == "pass"
        assert "label" not in doc["config"]
