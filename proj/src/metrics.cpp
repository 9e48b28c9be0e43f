#include "lfshield/metrics.hpp"

#include "lfshield/errors.hpp"

namespace lfshield {

ConfusionMatrix confusion(std::span<const Label> predictions, std::span<const Label> truth) {
    if (predictions.size() != truth.size())
        throw LengthError("predictions (" + std::to_string(predictions.size()) + ") and truth (" +
                          std::to_string(truth.size()) + ") differ in length");
    if (predictions.empty()) throw LengthError("confusion matrix of zero samples");
    ConfusionMatrix cm;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        const bool pred = predictions[i] == Label::Malicious;
        const bool actual = truth[i] == Label::Malicious;
        if (pred && actual) ++cm.tp;
        else if (!pred && !actual) ++cm.tn;
        else if (pred) ++cm.fp;
        else ++cm.fn;
    }
    return cm;
}

namespace {
std::optional<double> ratio(std::size_t num, std::size_t den) {
    if (den == 0) return std::nullopt;
    return static_cast<double>(num) / static_cast<double>(den);
}
}  // namespace

MetricsReport rates(const ConfusionMatrix& cm) {
    if (cm.total() == 0) throw EmptyMatrixError("confusion matrix is empty");
    MetricsReport r;
    r.tpr = ratio(cm.tp, cm.tp + cm.fn);
    r.tnr = ratio(cm.tn, cm.tn + cm.fp);
    r.fpr = ratio(cm.fp, cm.fp + cm.tn);
    r.fnr = ratio(cm.fn, cm.fn + cm.tp);
    r.accuracy = static_cast<double>(cm.tp + cm.tn) / static_cast<double>(cm.total());
    return r;
}

}  // namespace lfshield
