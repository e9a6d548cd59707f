#include <doctest.h>

#include <cmath>
#include <sstream>

#include "aqsim/common/error.hpp"
#include "aqsim/flight/dynamics.hpp"
#include "aqsim/flight/profile.hpp"

using namespace aqsim;
using namespace aqsim::flight;

namespace {

AirplaneConfig airframe(double mass, double area, double cl = 1.0) {
  AirplaneConfig c;
  c.mass_kg = mass;
  c.wing_area_m2 = area;
  c.lift_coeff = cl;
  return c;
}

// Independent evaluation of the empirical thrust fit, written out longhand.
double thrust_oracle(double rpm, double d, double pitch, double v0) {
  return 4.3294399e-8 * rpm * (std::pow(d, 3.5) / std::sqrt(pitch)) * (4.3294399e-4 * rpm * pitch - v0);
}

}  // namespace

TEST_CASE("weight force is mass times gravity") {
  Environment env;
  CHECK(weight_force(airframe(4, 0.64), env) == doctest::Approx(40.0).epsilon(0.02));
  CHECK(weight_force(airframe(0.001, 0.64), env) == doctest::Approx(0.00981));
  CHECK(weight_force(airframe(5, 0.64), env) == doctest::Approx(49.05));
}

TEST_CASE("takeoff velocity") {
  Environment env;
  auto cfg = airframe(4, 0.64);
  CHECK(takeoff_velocity(40.0, cfg, env) == doctest::Approx(10.1).epsilon(0.05 / 10.1));

  auto doubled = cfg;
  doubled.wing_area_m2 *= 2;
  CHECK(takeoff_velocity(40.0, doubled, env) ==
        doctest::Approx(takeoff_velocity(40.0, cfg, env) / std::sqrt(2.0)).epsilon(1e-12));

  // sqrt(80 / (1.02 * 0.63 * 1.225)) = 10.0811
  CHECK(takeoff_velocity(40.0, airframe(4, 0.63, 1.02), env) == doctest::Approx(10.0811).epsilon(1e-4));

  auto no_lift = cfg;
  no_lift.lift_coeff = 0;
  CHECK_THROWS_AS(takeoff_velocity(40.0, no_lift, env), DomainError);
}

TEST_CASE("lift coefficient inverts takeoff velocity") {
  Environment env;
  auto cfg = airframe(4, 0.64);
  cfg.reference_area_m2 = 0.63;
  CHECK(lift_coefficient(40.0, cfg, env, 10.1) == doctest::Approx(1.0).epsilon(0.02));
  CHECK(lift_coefficient(40.0, cfg, env, 20.2) == doctest::Approx(lift_coefficient(40.0, cfg, env, 10.1) / 4).epsilon(1e-12));
  CHECK_THROWS_AS(lift_coefficient(40.0, cfg, env, 0.0), DomainError);

  for (double mass : {0.5, 2.0, 4.0, 9.0}) {
    for (double area : {0.2, 0.63, 1.5}) {
      for (double cl : {0.6, 1.0, 1.2}) {
        auto c = airframe(mass, area, cl);
        const double v = takeoff_velocity(c, env);
        CHECK(std::abs(lift_coefficient(c, env, v) - cl) / cl < 1e-9);
      }
    }
  }
}

TEST_CASE("reynolds number") {
  Environment env;
  CHECK(reynolds(env, 10.1, 0.3) == doctest::Approx(200529.0).epsilon(0.001));
  CHECK(reynolds(env, 0.0, 0.3) == 0.0);
  CHECK(reynolds(env, 20.2, 0.3) == 2.0 * reynolds(env, 10.1, 0.3));
}

TEST_CASE("motor rpm") {
  PropulsionConfig p;
  CHECK(motor_rpm(p) == doctest::Approx(12432.0));
  p.voltage_v = 0;
  CHECK(motor_rpm(p) == 0.0);
  p.voltage_v = 22.2;
  p.kv_rpm_per_volt = 530;
  CHECK(motor_rpm(p) == doctest::Approx(11766.0));
}

TEST_CASE("dynamic thrust") {
  PropulsionConfig p;
  const auto ft = dynamic_thrust(p, 12432, 10.1);
  CHECK(ft.newtons == doctest::Approx(50.0).epsilon(0.01));
  CHECK_FALSE(ft.clamped);

  const double v_zero = 4.3294399e-4 * 12432 * 6;
  CHECK(dynamic_thrust(p, 12432, v_zero).newtons == doctest::Approx(0.0));

  const double static_oracle = thrust_oracle(12432, 14, 6, 0);
  CHECK(static_oracle == doctest::Approx(72.86).epsilon(0.001));
  CHECK(dynamic_thrust(p, 12432, 0).newtons == doctest::Approx(static_oracle).epsilon(1e-12));

  const auto past = dynamic_thrust(p, 12432, v_zero + 5);
  CHECK(past.newtons == 0.0);
  CHECK(past.clamped);
}

TEST_CASE("thrust decreases with airspeed until the zero crossing") {
  PropulsionConfig p;
  const double rpm = motor_rpm(p);
  const double zero = pitch_speed(p, rpm);
  double prev = dynamic_thrust(p, rpm, 0).newtons;
  for (double v = 0.5; v < zero; v += 0.5) {
    const double cur = dynamic_thrust(p, rpm, v).newtons;
    CHECK(cur < prev);
    CHECK(cur == doctest::Approx(thrust_oracle(rpm, 14, 6, v)).epsilon(1e-12));
    prev = cur;
  }
}

TEST_CASE("takeoff velocity trends over a parameter sweep") {
  Environment env;
  for (double mass = 1.0; mass <= 6.0; mass += 0.5) {
    double prev = INFINITY;
    for (double area = 0.3; area <= 1.2; area += 0.05) {
      const double v = takeoff_velocity(airframe(mass, area), env);
      CHECK(v < prev);
      CHECK(takeoff_velocity(airframe(mass + 0.25, area), env) > v);
      prev = v;
    }
  }
}

TEST_CASE("drag and rolling friction") {
  Environment env;
  AirplaneConfig cfg;
  cfg.reference_area_m2 = 0.63;
  CHECK(drag_force(cfg, env, 10.26) == doctest::Approx(0.81).epsilon(0.01));
  CHECK(drag_force(cfg, env, 0) == 0.0);
  CHECK(drag_force(cfg, env, 20.52) == doctest::Approx(4 * drag_force(cfg, env, 10.26)).epsilon(1e-12));

  CHECK(rolling_friction(cfg, 40) == doctest::Approx(0.2));
  auto frictionless = cfg;
  frictionless.rolling_friction = 0;
  CHECK(rolling_friction(frictionless, 40) == 0.0);
  CHECK(rolling_friction(cfg, 49.05) == doctest::Approx(0.005 * 49.05));
}

TEST_CASE("net force, acceleration and power") {
  const auto profile = stick60_paper_profile();
  OperatingPoint op{10.1, 10.26, 12.25, 40.0};
  const auto fb = net_force_accel_power(profile.airframe, profile.env, profile.propulsion, op);
  CHECK(fb.net_force_n == doctest::Approx(49.0).epsilon(0.01));
  CHECK(fb.accel_mps2 == doctest::Approx(12.25).epsilon(0.01));
  CHECK(fb.mech_power_w == doctest::Approx(600.0).epsilon(0.01));
  CHECK(fb.elec_power_w == doctest::Approx(652.0).epsilon(0.01));

  SUBCASE("single speed overload") {
    const auto at = net_force_accel_power(profile.airframe, profile.env, profile.propulsion, 10.1);
    CHECK(at.net_force_n == doctest::Approx(49.0).epsilon(0.01));
    CHECK(at.accel_mps2 == doctest::Approx(12.25).epsilon(0.01));
    CHECK_THROWS_AS(net_force_accel_power(profile.airframe, profile.env, profile.propulsion, -1.0), DomainError);
  }

  SUBCASE("equilibrium gives zero net force and power") {
    auto cfg = profile.airframe;
    cfg.rolling_friction = 0;
    const double v = 20;
    const double ft = dynamic_thrust(profile.propulsion, motor_rpm(profile.propulsion), v).newtons;
    cfg.drag_coeff = ft / (0.5 * profile.env.air_density * cfg.aero_area() * v * v);
    const auto eq = net_force_accel_power(cfg, profile.env, profile.propulsion, v);
    CHECK(eq.net_force_n == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(std::abs(eq.accel_mps2) < 1e-9);
    CHECK(std::abs(eq.elec_power_w) < 1e-7);
  }
}

TEST_CASE("thrust to weight") {
  auto r = thrust_to_weight(50, 40);
  CHECK(r.ratio == doctest::Approx(1.25));
  CHECK(r.feasible);
  r = thrust_to_weight(40, 40);
  CHECK(r.ratio == 1.0);
  CHECK(r.feasible);
  r = thrust_to_weight(50, 49.05);
  CHECK(r.ratio == doctest::Approx(1.019).epsilon(1e-3));
  CHECK(r.feasible);
  CHECK_FALSE(thrust_to_weight(39, 40).feasible);
  CHECK_THROWS_AS(thrust_to_weight(1, 0), DomainError);
}

TEST_CASE("flight time model") {
  PropulsionConfig p;
  CHECK(flight_time(p, 23.3) == doctest::Approx(13.9).epsilon(0.02));
  CHECK(flight_time(p, 62.4) == doctest::Approx(5.2).epsilon(0.02));
  CHECK(flight_time(p, 11.65) == doctest::Approx(2 * flight_time(p, 23.3)).epsilon(1e-12));
  CHECK_THROWS_AS(flight_time(p, 0), DomainError);
  CHECK_THROWS_AS(flight_time(p, -3), DomainError);

  const double energy = flight_time(p, 1.0);
  for (double i = 0.5; i < 80; i *= 1.7) CHECK(flight_time(p, i) * i == doctest::Approx(energy).epsilon(1e-12));
}

TEST_CASE("partial load interpolation") {
  const auto& table = stick60_partial_load();
  const auto knot = partial_load_interpolate(table, 70);
  CHECK(knot.current_a == 23.3);
  CHECK(knot.rpm == 8000);

  const auto mid = partial_load_interpolate(table, 74);
  CHECK(mid.current_a == doctest::Approx(27.15));
  CHECK(mid.rpm == doctest::Approx(8400));
  CHECK(mid.thrust_g == doctest::Approx((2675 + 3237) / 2.0));

  const auto top = partial_load_interpolate(table, 110);
  CHECK(top.throttle_pct == 100);
  CHECK(top.current_a == 62.4);
  CHECK(partial_load_interpolate(table, -5).throttle_pct == 13);

  CHECK_THROWS_AS(partial_load_interpolate({}, 50), DomainError);
  CHECK(validate(std::span<const PartialLoadRow>(table)).empty());
}

TEST_CASE("mixed flight time follows the weighted mean current") {
  PropulsionConfig p;
  const auto& table = stick60_partial_load();
  const DutySegment all_cruise[] = {{70, 1.0}};
  CHECK(mixed_flight_time(p, table, all_cruise) == doctest::Approx(flight_time(p, 23.3)));
  const DutySegment mix[] = {{100, 1.0}, {70, 3.0}};
  CHECK(mixed_flight_time(p, table, mix) == doctest::Approx(flight_time(p, (62.4 + 3 * 23.3) / 4)));
  CHECK_THROWS_AS(mixed_flight_time(p, table, std::span<const DutySegment>{}), DomainError);
}

TEST_CASE("payload budget") {
  const auto b = payload_budget(stick60_payload(), 3000);
  CHECK(b.total_g == doctest::Approx(1855.5));
  CHECK(b.feasible);
  CHECK(payload_budget({}, 3000).total_g == 0.0);
  CHECK(payload_budget({}, 3000).feasible);
  const PayloadItem heavy[] = {{"lump", 3000.1}};
  CHECK_FALSE(payload_budget(heavy, 3000).feasible);
  const PayloadItem exact[] = {{"lump", 3000.0}};
  CHECK(payload_budget(exact, 3000).feasible);
}

TEST_CASE("sizing profile parsing and report") {
  const char* text = R"(
# trimmed profile
name = test
airframe.mass_kg = 4
airframe.design_weight_n = 40
airframe.wing_area_m2 = 0.64
airframe.reference_area_m2 = 0.63
prop.kv_rpm_per_volt = 560
point.thrust_airspeed_mps = 10.1
point.drag_airspeed_mps = 10.26
point.power_speed_mps = 12.25
partial_load = 8000 70 23.3 2675 13.9
partial_load = 11054 100 62.4 5108 5.2
payload = 819 Battery
payload = 77.5 Sensors pack
)";
  const auto p = parse_profile(text);
  CHECK(p.name == "test");
  CHECK(p.partial_load.size() == 2);
  REQUIRE(p.payload.size() == 2);
  CHECK(p.payload[1].name == "Sensors pack");
  const auto r = make_sizing_report(p);
  CHECK(r.takeoff_velocity_mps == doctest::Approx(10.1).epsilon(0.005));
  CHECK(r.balance.elec_power_w == doctest::Approx(652).epsilon(0.01));

  std::ostringstream csv;
  write_flight_time_csv(csv, r, p.propulsion);
  CHECK(csv.str() ==
        "rpm,throttle_pct,current_a,thrust_g,run_time_min,model_run_time_min\n"
        "8000,70,23.3,2675,13.9,13.9\n"
        "11054,100,62.4,5108,5.2,5.2\n");

  CHECK_THROWS_AS(parse_profile("bogus.key = 1\n"), ParseError);
  CHECK_THROWS_AS(parse_profile("airframe.mass_kg = heavy\n"), ParseError);
}

TEST_CASE("invalid profile fields are listed exhaustively") {
  auto p = stick60_paper_profile();
  p.airframe.mass_kg = 0;
  p.propulsion.motor_efficiency = 1.5;
  p.partial_load.clear();
  try {
    make_sizing_report(p);
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    CHECK(e.problems().size() == 3);
  }
}
