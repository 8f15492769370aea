#include <pybind11/complex.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "varik/builtin.hpp"
#include "varik/cli.hpp"

namespace py = pybind11;
using namespace varik;
using C = std::complex<double>;

namespace {

std::vector<std::string> with_consts(std::vector<std::string> chart,
                                     const std::vector<std::string>& const_names) {
    chart.insert(chart.end(), const_names.begin(), const_names.end());
    return chart;
}

std::vector<std::string> tm_names(int n, bool with_z) {
    std::vector<std::string> v;
    for (int i = 0; i < n; ++i) v.push_back("x" + std::to_string(i));
    for (int i = 0; i < n; ++i) v.push_back("y" + std::to_string(i));
    if (with_z)
        for (int i = 0; i < n; ++i) v.push_back("z" + std::to_string(i));
    return v;
}

ExprCurve make_curve(const std::vector<std::string>& components, std::pair<double, double> interval,
                     const std::vector<std::string>& const_names,
                     const std::vector<double>& const_values) {
    return make_expr_curve(components, interval, const_names, const_values);
}

template <typename S>
ExprPatchT<S> make_patch(const std::vector<std::string>& components,
                         const std::vector<std::pair<double, double>>& rect,
                         const std::vector<std::string>& const_names,
                         const std::vector<double>& const_values, ScalarKind kind) {
    const int k = static_cast<int>(rect.size());
    std::vector<std::string> vars;
    for (int a = 1; a <= k; ++a) vars.push_back("t" + std::to_string(a));
    vars.insert(vars.end(), const_names.begin(), const_names.end());
    std::vector<LagrangianExpr> parsed;
    for (const auto& c : components) parsed.push_back(LagrangianExpr::parse(c, vars, kind));
    std::vector<S> env;
    for (double v : const_values) env.emplace_back(v);
    return ExprPatchT<S>(std::move(parsed), rect, k, std::move(env));
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "parameterization-invariant Lagrangian mechanics and field theory";

    py::register_exception<ParseError>(m, "ExpressionParseError");
    py::register_exception<NonConvergent>(m, "NonConvergent");
    py::register_exception<SingularHessian>(m, "SingularHessianError");

    // ---- expressions ----
    py::class_<LagrangianExpr>(m, "Expression")
        .def_static(
            "parse",
            [](const std::string& source, const std::vector<std::string>& vars, bool complex_mode) {
                return LagrangianExpr::parse(source, vars,
                                             complex_mode ? ScalarKind::Complex : ScalarKind::Real);
            },
            py::arg("source"), py::arg("variables"), py::arg("complex_mode") = false)
        .def("__str__", &LagrangianExpr::print)
        .def_property_readonly("variables", &LagrangianExpr::var_names)
        .def("evaluate",
             [](const LagrangianExpr& e, const std::vector<double>& values) {
                 return e.evaluate_real(values);
             })
        .def("evaluate_complex", [](const LagrangianExpr& e, const std::vector<C>& values) {
            return e.evaluate_complex(values);
        });

    // ---- curves and patches ----
    py::class_<ExprCurve>(m, "Curve")
        .def(py::init(&make_curve), py::arg("components"), py::arg("interval"),
             py::arg("const_names") = std::vector<std::string>{},
             py::arg("const_values") = std::vector<double>{})
        .def_property_readonly("interval", &ExprCurve::interval)
        .def("point", [](const ExprCurve& c, double t) { return c.point(t); });

    py::class_<ExprPatchT<double>>(m, "Patch")
        .def(py::init([](const std::vector<std::string>& comps,
                         const std::vector<std::pair<double, double>>& rect,
                         const std::vector<std::string>& cn, const std::vector<double>& cv) {
                 return make_patch<double>(comps, rect, cn, cv, ScalarKind::Real);
             }),
             py::arg("components"), py::arg("rect"),
             py::arg("const_names") = std::vector<std::string>{},
             py::arg("const_values") = std::vector<double>{});

    py::class_<ExprPatchT<C>>(m, "ComplexPatch")
        .def(py::init([](const std::vector<std::string>& comps,
                         const std::vector<std::pair<double, double>>& rect,
                         const std::vector<std::string>& cn, const std::vector<double>& cv) {
                 return make_patch<C>(comps, rect, cn, cv, ScalarKind::Complex);
             }),
             py::arg("components"), py::arg("rect"),
             py::arg("const_names") = std::vector<std::string>{},
             py::arg("const_values") = std::vector<double>{});

    // ---- first-order mechanics ----
    py::class_<FinslerStructure>(m, "FinslerStructure")
        .def(py::init([](int n, const std::string& expr, const std::vector<std::string>& cn,
                         const std::vector<double>& cv) {
                 auto F = LagrangianExpr::parse(expr, with_consts(tm_names(n, false), cn));
                 return FinslerStructure(n, std::move(F), cv);
             }),
             py::arg("n"), py::arg("expression"),
             py::arg("const_names") = std::vector<std::string>{},
             py::arg("const_values") = std::vector<double>{})
        .def_property_readonly("n", &FinslerStructure::n)
        .def("density", [](const FinslerStructure& s, const std::vector<double>& chart_point) {
            return s.eval_point(chart_point);
        });

    m.def(
        "lift_conventional",
        [](const std::string& L, const std::vector<std::string>& lvars, int config_dim,
           const std::vector<double>& env) {
            return lift_conventional(LagrangianExpr::parse(L, lvars), config_dim, env);
        },
        py::arg("lagrangian"), py::arg("variables"), py::arg("config_dim"),
        py::arg("const_values") = std::vector<double>{});

    m.def(
        "check_homogeneity",
        [](const FinslerStructure& s, std::uint64_t seed, int count, std::vector<double> lambdas) {
            auto spec = s.admissible_samples();
            spec.seed = seed;
            spec.count = count;
            auto rep = check_homogeneity(s, spec, lambdas);
            return py::dict(py::arg("scaling") = rep.max_rel_residual_scaling,
                            py::arg("euler") = rep.max_rel_residual_euler);
        },
        py::arg("structure"), py::arg("seed") = 2024, py::arg("count") = 200,
        py::arg("lambdas") = std::vector<double>{0.5, 2.0, M_PI});

    m.def(
        "finsler_length",
        [](const FinslerStructure& s, const ExprCurve& c) {
            QuadratureSpec q;
            auto len = finsler_length(s, c, q);
            return py::dict(py::arg("value") = len.value, py::arg("via_form") = len.via_form);
        },
        py::arg("structure"), py::arg("curve"));

    m.def(
        "el_residual",
        [](const FinslerStructure& s, const ExprCurve& c, double t) {
            return el_residual(s, c, t);
        },
        py::arg("structure"), py::arg("curve"), py::arg("t"));

    m.def(
        "solve_bvp",
        [](const FinslerStructure& s, int gauge_index, const std::vector<double>& start,
           const std::vector<double>& end, int rk4_steps, double shoot_tol,
           std::optional<std::vector<double>> slope, int samples) {
            BvpProblem p;
            p.structure = &s;
            p.gauge.gauge_index = gauge_index;
            p.start = start;
            p.end = end;
            p.rk4_steps = rk4_steps;
            p.shoot_tol = shoot_tol;
            if (slope) p.initial_slope = *slope;
            auto sol = solve_bvp(p);
            auto [t0, t1] = sol.curve->interval();
            std::vector<std::vector<double>> table;
            for (int i = 0; i <= samples; ++i) {
                double t = t0 + (t1 - t0) * i / samples;
                auto pt = sol.curve->point(t);
                std::vector<double> row = {t};
                row.insert(row.end(), pt.begin(), pt.end());
                table.push_back(std::move(row));
            }
            return py::dict(py::arg("endpoint_miss") = sol.endpoint_miss,
                            py::arg("iterations") = sol.iterations,
                            py::arg("max_el_residual") = sol.max_el_residual,
                            py::arg("samples") = table);
        },
        py::arg("structure"), py::arg("gauge_index"), py::arg("start"), py::arg("end"),
        py::arg("rk4_steps") = 2000, py::arg("shoot_tol") = 1e-10,
        py::arg("slope") = std::nullopt, py::arg("samples") = 100);

    // ---- second-order mechanics ----
    py::class_<KawaMechStructure>(m, "KawaMechStructure")
        .def(py::init([](int n, const std::string& expr, const std::vector<std::string>& cn,
                         const std::vector<double>& cv) {
                 auto K = LagrangianExpr::parse(expr, with_consts(tm_names(n, true), cn));
                 return KawaMechStructure(n, std::move(K), cv);
             }),
             py::arg("n"), py::arg("expression"),
             py::arg("const_names") = std::vector<std::string>{},
             py::arg("const_values") = std::vector<double>{});

    m.def(
        "lift2_conventional",
        [](const std::string& L, const std::vector<std::string>& lvars, int config_dim,
           const std::vector<double>& env) {
            return lift2_conventional(LagrangianExpr::parse(L, lvars), config_dim, env);
        },
        py::arg("lagrangian"), py::arg("variables"), py::arg("config_dim"),
        py::arg("const_values") = std::vector<double>{});

    m.def(
        "check_zermelo",
        [](const KawaMechStructure& s, std::uint64_t seed, int count, std::vector<double> lambdas,
           std::vector<double> rhos) {
            auto spec = s.admissible_samples();
            spec.seed = seed;
            spec.count = count;
            auto rep = check_zermelo(s, spec, lambdas, rhos);
            return py::dict(py::arg("scaling") = rep.res_scaling, py::arg("A") = rep.res_A,
                            py::arg("B") = rep.res_B);
        },
        py::arg("structure"), py::arg("seed") = 2024, py::arg("count") = 200,
        py::arg("lambdas") = std::vector<double>{0.5, 2.0, M_PI},
        py::arg("rhos") = std::vector<double>{-1.0, 0.0, 3.0});

    m.def(
        "fk_length",
        [](const KawaMechStructure& s, const ExprCurve& c) {
            QuadratureSpec q;
            auto len = fk_length(s, c, q);
            return py::dict(py::arg("value") = len.value, py::arg("via_form") = len.via_form);
        },
        py::arg("structure"), py::arg("curve"));

    m.def(
        "el2_residual",
        [](const KawaMechStructure& s, const ExprCurve& c, double t) {
            return el2_residual(s, c, t);
        },
        py::arg("structure"), py::arg("curve"), py::arg("t"));

    // ---- first-order field theory ----
    py::class_<ArealStructure>(m, "ArealStructure")
        .def(py::init([](int n, int k, const std::string& expr, const std::vector<std::string>& cn,
                         const std::vector<double>& cv) {
                 auto K = LagrangianExpr::parse(
                     expr, with_consts(ArealStructure::chart_names(n, k), cn));
                 return ArealStructure(n, k, std::move(K), cv);
             }),
             py::arg("n"), py::arg("k"), py::arg("expression"),
             py::arg("const_names") = std::vector<std::string>{},
             py::arg("const_values") = std::vector<double>{});

    py::class_<CArealStructure>(m, "ComplexArealStructure")
        .def(py::init([](int n, int k, const std::string& expr, const std::vector<std::string>& cn,
                         const std::vector<double>& cv) {
                 auto K = LagrangianExpr::parse(
                     expr, with_consts(CArealStructure::chart_names(n, k), cn),
                     ScalarKind::Complex);
                 std::vector<C> env;
                 for (double v : cv) env.emplace_back(v);
                 return CArealStructure(n, k, std::move(K), env);
             }),
             py::arg("n"), py::arg("k"), py::arg("expression"),
             py::arg("const_names") = std::vector<std::string>{},
             py::arg("const_values") = std::vector<double>{});

    m.def(
        "lift_field_conventional",
        [](const std::string& L, const std::vector<std::string>& lvars, int k, int fields,
           const std::vector<double>& env, bool complex_mode) -> py::object {
            auto kind = complex_mode ? ScalarKind::Complex : ScalarKind::Real;
            auto parsed = LagrangianExpr::parse(L, lvars, kind);
            if (complex_mode) {
                std::vector<C> cenv;
                for (double v : env) cenv.emplace_back(v);
                return py::cast(lift_field_conventional<C>(parsed, k, fields, cenv));
            }
            return py::cast(lift_field_conventional<double>(parsed, k, fields, env));
        },
        py::arg("lagrangian"), py::arg("variables"), py::arg("k"), py::arg("fields"),
        py::arg("const_values") = std::vector<double>{}, py::arg("complex_mode") = false);

    m.def(
        "kawaguchi_area",
        [](const ArealStructure& s, const ExprPatchT<double>& p) {
            QuadratureSpec q;
            auto r = kawaguchi_area<double>(s, p, q);
            return py::dict(py::arg("value") = r.value, py::arg("via_form") = r.via_form);
        },
        py::arg("structure"), py::arg("patch"));

    m.def(
        "el_field_residual",
        [](const ArealStructure& s, const ExprPatchT<double>& p, const std::vector<double>& t) {
            return el_field_residual<double>(s, p, t);
        },
        py::arg("structure"), py::arg("patch"), py::arg("t"));

    m.def(
        "el_field_residual_complex",
        [](const CArealStructure& s, const ExprPatchT<C>& p, const std::vector<double>& t) {
            return el_field_residual<C>(s, p, t);
        },
        py::arg("structure"), py::arg("patch"), py::arg("t"));

    m.def(
        "check_homogeneity_field",
        [](const CArealStructure& s, std::uint64_t seed, int count, std::vector<double> lambdas) {
            auto spec = s.admissible_samples();
            spec.seed = seed;
            spec.count = count;
            auto rep = check_homogeneity_field(s, spec, lambdas);
            return py::dict(py::arg("scaling") = rep.max_rel_residual_scaling,
                            py::arg("euler") = rep.max_rel_residual_euler);
        },
        py::arg("structure"), py::arg("seed") = 2024, py::arg("count") = 200,
        py::arg("lambdas") = std::vector<double>{0.5, 2.0, M_PI});

    // ---- CLI surface ----
    m.def(
        "run",
        [](const std::string& problem, const std::vector<std::string>& overrides) {
            auto r = cli::run(problem, overrides);
            return py::make_tuple(r.exit_code, r.report, r.error);
        },
        py::arg("problem"), py::arg("overrides") = std::vector<std::string>{});
    m.def("list_builtins", &cli::list_builtins);
    m.def("schema", &cli::schema_text);

    m.attr("__version__") = "0.1.0";
}
