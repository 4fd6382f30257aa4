#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sstream>
#include <string>

#include "imoc/problem_io.hpp"

using namespace imoc;

namespace {

NamedProblem parse(const std::string& text) {
  std::istringstream in(text);
  return parse_problem(in);
}

const char* kBasic = R"(# quadratic parking
name basic
states 1
controls 1
horizon 2
range 1 -1 1
f 1 0 0 0
G 1 1 1 0 0
h 1 0 2
X 1 1 0 0
X 1 -1 0 2
initial dirac 1
terminal dirac 1/2
)";

}  // namespace

TEST_CASE("parsing the basic problem") {
  auto np = parse(kBasic);
  CHECK(np.name == "basic");
  const auto& p = np.ocp;
  CHECK(p.n_states == 1);
  CHECK(p.m_controls == 1);
  CHECK(p.horizon == doctest::Approx(2.0));
  CHECK(p.state_lo == std::vector<double>{-1.0});
  CHECK(p.state_hi == std::vector<double>{1.0});

  // f is identically zero but allocated over (t, x)
  CHECK(p.dynamics.size() == 1);
  std::vector<double> probe{0.7, 0.3};
  CHECK(p.dynamics[0].evaluate(probe) == doctest::Approx(0.0));
  CHECK(p.control_matrix[0][0].evaluate(probe) == doctest::Approx(1.0));
  CHECK(p.running_cost.evaluate(probe) == doctest::Approx(0.09));

  REQUIRE(p.state_set.inequalities.size() == 1);
  CHECK(p.state_set.inequalities[0].evaluate(probe) == doctest::Approx(1.0 - 0.09));

  CHECK(p.initial.kind == BoundaryCondition::Kind::Dirac);
  CHECK(p.initial.point == std::vector<double>{1.0});
  // rational literal 1/2
  CHECK(p.terminal.point == std::vector<double>{0.5});

  CHECK_FALSE(p.tv_bound.has_value());
  CHECK(p.control_mode == ControlMode::SignedMeasure);
  CHECK_FALSE(p.tv_cost);
  CHECK_FALSE(p.free_final_time);
}

TEST_CASE("optional keys") {
  std::string text(kBasic);

  SUBCASE("tv budget") {
    auto np = parse(text + "tv_bound 1/4\n");
    REQUIRE(np.ocp.tv_bound.has_value());
    CHECK(*np.ocp.tv_bound == doctest::Approx(0.25));
  }

  SUBCASE("discrete control values") {
    auto np = parse(text + "control_mode discrete\ncontrol_value 1\ncontrol_value -1\n");
    CHECK(np.ocp.control_mode == ControlMode::DiscreteSet);
    REQUIRE(np.ocp.control_values.size() == 2);
    CHECK(np.ocp.control_values[0] == std::vector<double>{1.0});
    CHECK(np.ocp.control_values[1] == std::vector<double>{-1.0});
  }

  SUBCASE("fuel objective and free final time") {
    auto np = parse(text + "tv_cost on\nfree_final_time on\n");
    CHECK(np.ocp.tv_cost);
    CHECK(np.ocp.free_final_time);
  }
}

TEST_CASE("malformed input is rejected with a line reference") {
  SUBCASE("unknown key") {
    std::string text(kBasic);
    text += "granularity 3\n";
    try {
      parse(text);
      FAIL("expected a parse error");
    } catch (const std::runtime_error& e) {
      std::string msg = e.what();
      CHECK(msg.find("granularity") != std::string::npos);
      CHECK(msg.find("line") != std::string::npos);
    }
  }

  SUBCASE("dimensions must come before terms") {
    CHECK_THROWS(parse("name x\nf 1 1 0 0\n"));
  }

  SUBCASE("validation failures surface as errors") {
    // terminal dirac outside the declared range
    std::string text(kBasic);
    text += "range 1 0 1/4\n";
    CHECK_THROWS(parse(text));
  }

  SUBCASE("bad rational") {
    CHECK_THROWS(parse("name x\nstates 1\ncontrols 1\nhorizon 1/0\n"));
  }
}

TEST_CASE("all shipped problem files load cleanly") {
  const std::string dir = IMOC_PROBLEM_DIR;
  for (const char* stem : {"ex1", "ex2", "ex3", "ex4", "ex5", "ex6",
                           "rdv_case1", "rdv_case3"}) {
    CAPTURE(stem);
    auto np = load_problem(dir + "/" + stem + ".prob");
    CHECK(!np.name.empty());
    CHECK(np.ocp.n_states >= 1);
    auto diags = validate(np.ocp);
    CHECK_FALSE(has_errors(diags));
  }
}

TEST_CASE("shipped files carry the expected structure") {
  const std::string dir = IMOC_PROBLEM_DIR;

  auto ex3 = load_problem(dir + "/ex3.prob").ocp;
  CHECK(ex3.control_mode == ControlMode::DiscreteSet);
  CHECK(ex3.control_values.size() == 2);

  auto ex4 = load_problem(dir + "/ex4.prob").ocp;
  REQUIRE(ex4.tv_bound.has_value());
  CHECK(*ex4.tv_bound == doctest::Approx(0.25));

  auto ex5 = load_problem(dir + "/ex5.prob").ocp;
  CHECK(ex5.tv_cost);

  auto ex6 = load_problem(dir + "/ex6.prob").ocp;
  CHECK(ex6.free_final_time);
  CHECK(ex6.n_states == 2);

  auto rdv = load_problem(dir + "/rdv_case1.prob").ocp;
  CHECK(rdv.n_states == 4);
  CHECK(rdv.m_controls == 2);
  CHECK(rdv.tv_cost);
}
