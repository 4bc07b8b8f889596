#include "ozonecast/model_io.hpp"

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <json.hpp>

#include "ozonecast/errors.hpp"

namespace ozonecast {

using ordered_json = nlohmann::ordered_json;

namespace {

ordered_json matrix_to_json(const Matrix& m) {
    ordered_json j;
    j["rows"] = m.rows();
    j["cols"] = m.cols();
    j["data"] = m.data();
    return j;
}

Matrix matrix_from_json(const ordered_json& j) {
    Matrix m(j.at("rows").get<std::size_t>(), j.at("cols").get<std::size_t>());
    m.data() = j.at("data").get<std::vector<double>>();
    if (m.data().size() != m.rows() * m.cols()) throw Error("model file: bad matrix payload");
    return m;
}

ordered_json scaling_to_json(const Scaling& s) {
    ordered_json j;
    j["kind"] = s.kind == ScalingKind::zscore ? "zscore" : "minmax";
    ordered_json cols = ordered_json::array();
    for (const auto& [a, b] : s.columns) cols.push_back({a, b});
    j["columns"] = cols;
    return j;
}

Scaling scaling_from_json(const ordered_json& j) {
    Scaling s;
    s.kind = j.at("kind").get<std::string>() == "minmax" ? ScalingKind::minmax : ScalingKind::zscore;
    for (const auto& pair : j.at("columns"))
        s.columns.emplace_back(pair.at(0).get<double>(), pair.at(1).get<double>());
    return s;
}

}  // namespace

std::string model_to_string(const ModelFile& model) {
    ordered_json j;
    j["format"] = "ozonecast-model";
    j["version"] = 1;
    j["kind"] = model.kind;
    j["columns"] = model.columns;
    j["scaling"] = scaling_to_json(model.scaling);

    if (model.kind == "mlp") {
        if (!model.net) throw Error("model file: mlp kind without network");
        const Network& net = *model.net;
        ordered_json nj;
        nj["inputs"] = net.inputs;
        nj["hidden"] = net.hidden;
        nj["output"] = net.output == OutputKind::sigmoid ? "sigmoid" : "identity";
        nj["weights"] = net.w;
        nj["mask"] = net.mask;
        j["network"] = nj;
    } else if (model.kind == "linear") {
        if (!model.linear) throw Error("model file: linear kind without model");
        ordered_json lj;
        lj["estimator"] = model.linear->kind == LinearModel::Kind::ridge ? "ridge" : "ols";
        lj["lambda"] = model.linear->lambda;
        lj["intercept"] = model.linear->intercept;
        lj["coefficients"] = model.linear->coefficients;
        j["linear"] = lj;
    } else if (model.kind == "logistic") {
        if (!model.logistic) throw Error("model file: logistic kind without model");
        const LogisticModel& lm = *model.logistic;
        ordered_json lj;
        lj["intercept"] = lm.intercept;
        lj["coefficients"] = lm.coefficients;
        lj["names"] = lm.names;
        lj["p_values"] = lm.p_values;
        lj["intercept_p_value"] = lm.intercept_p_value;
        lj["deviance"] = lm.deviance;
        lj["null_deviance"] = lm.null_deviance;
        lj["model_p_value"] = lm.model_p_value;
        j["logistic"] = lj;
    } else {
        throw Error("model file: unknown kind '" + model.kind + "'");
    }

    if (model.interval) {
        ordered_json ij;
        ij["q"] = model.interval->q;
        ij["n"] = model.interval->n;
        ij["s"] = model.interval->s;
        ij["gram_inverse"] = matrix_to_json(model.interval->gram_inverse);
        j["interval_context"] = ij;
    }

    ordered_json tj;
    tj["seed"] = model.seed;
    tj["final_cost"] = model.final_cost;
    tj["final_bic"] = model.final_bic;
    tj["selected_hidden"] = model.selected_hidden;
    tj["threshold"] = model.threshold;
    j["training"] = tj;

    return j.dump(2) + "\n";
}

void save_model(const std::filesystem::path& path, const ModelFile& model) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write model file '" + path.string() + "'");
    out << model_to_string(model);
}

ModelFile load_model(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open model file '" + path.string() + "'");
    ordered_json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw Error("model file '" + path.string() + "' is not valid JSON: " + e.what());
    }
    if (j.value("format", "") != "ozonecast-model")
        throw Error("'" + path.string() + "' is not an ozonecast model file");

    ModelFile model;
    model.kind = j.at("kind").get<std::string>();
    model.columns = j.at("columns").get<std::vector<std::string>>();
    model.scaling = scaling_from_json(j.at("scaling"));

    if (model.kind == "mlp") {
        const auto& nj = j.at("network");
        Network net;
        net.inputs = nj.at("inputs").get<int>();
        net.hidden = nj.at("hidden").get<int>();
        net.output = nj.at("output").get<std::string>() == "sigmoid" ? OutputKind::sigmoid
                                                                     : OutputKind::identity;
        net.w = nj.at("weights").get<std::vector<double>>();
        net.mask = nj.at("mask").get<std::vector<std::uint8_t>>();
        if (net.w.size() != net.param_count() || net.mask.size() != net.param_count())
            throw Error("model file: weight array size mismatch");
        model.net = std::move(net);
    } else if (model.kind == "linear") {
        const auto& lj = j.at("linear");
        LinearModel lm;
        lm.kind = lj.at("estimator").get<std::string>() == "ridge" ? LinearModel::Kind::ridge
                                                                   : LinearModel::Kind::ols;
        lm.lambda = lj.at("lambda").get<double>();
        lm.intercept = lj.at("intercept").get<double>();
        lm.coefficients = lj.at("coefficients").get<std::vector<double>>();
        model.linear = std::move(lm);
    } else if (model.kind == "logistic") {
        const auto& lj = j.at("logistic");
        LogisticModel lm;
        lm.intercept = lj.at("intercept").get<double>();
        lm.coefficients = lj.at("coefficients").get<std::vector<double>>();
        lm.names = lj.at("names").get<std::vector<std::string>>();
        lm.p_values = lj.at("p_values").get<std::vector<double>>();
        lm.intercept_p_value = lj.at("intercept_p_value").get<double>();
        lm.deviance = lj.at("deviance").get<double>();
        lm.null_deviance = lj.at("null_deviance").get<double>();
        lm.model_p_value = lj.at("model_p_value").get<double>();
        model.logistic = std::move(lm);
    } else {
        throw Error("model file: unknown kind '" + model.kind + "'");
    }

    if (j.contains("interval_context")) {
        const auto& ij = j.at("interval_context");
        IntervalContext ctx;
        ctx.q = ij.at("q").get<std::size_t>();
        ctx.n = ij.at("n").get<std::size_t>();
        ctx.s = ij.at("s").get<double>();
        ctx.gram_inverse = matrix_from_json(ij.at("gram_inverse"));
        model.interval = std::move(ctx);
    }

    const auto& tj = j.at("training");
    model.seed = tj.at("seed").get<std::uint64_t>();
    model.final_cost = tj.at("final_cost").get<double>();
    model.final_bic = tj.at("final_bic").get<double>();
    model.selected_hidden = tj.at("selected_hidden").get<int>();
    model.threshold = tj.at("threshold").get<double>();
    return model;
}

std::string content_hash(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open '" + path.string() + "'");
    std::uint64_t h = 0xcbf29ce484222325ULL;
    char c;
    while (in.get(c)) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf);
}

}  // namespace ozonecast
