#include <pybind11/complex.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "cvqkd/channel.hpp"
#include "cvqkd/ldpc.hpp"
#include "cvqkd/mdrecon.hpp"
#include "cvqkd/paramest.hpp"
#include "cvqkd/pipeline.hpp"
#include "cvqkd/recon.hpp"
#include "cvqkd/rng.hpp"
#include "cvqkd/rxdsp.hpp"
#include "cvqkd/security.hpp"
#include "cvqkd/snu.hpp"
#include "cvqkd/toeplitz.hpp"
#include "cvqkd/txdsp.hpp"

namespace py = pybind11;
using namespace cvqkd;

PYBIND11_MODULE(_cvqkd, m) {
    m.doc() = "CV-QKD link twin: DSP chain, parameter estimation and key rates";

    // rng / statistics
    m.def("normal_quantile", &normal_quantile);
    m.def("gaussian_from_uniform", &gaussian_from_uniform, py::arg("words"),
          py::arg("variance"));

    // frames and calibration
    py::enum_<FrameUnit>(m, "FrameUnit")
        .value("adc_counts", FrameUnit::adc_counts)
        .value("snu_normalized", FrameUnit::snu_normalized);
    py::class_<SampleFrame>(m, "SampleFrame")
        .def(py::init<>())
        .def_readwrite("samples", &SampleFrame::samples)
        .def_readwrite("sample_rate_hz", &SampleFrame::sample_rate_hz)
        .def_readwrite("unit", &SampleFrame::unit)
        .def_readwrite("frame_id", &SampleFrame::frame_id)
        .def("__len__", [](const SampleFrame& f) { return f.samples.size(); });
    py::class_<SymbolFrame>(m, "SymbolFrame")
        .def(py::init<>())
        .def_readwrite("symbols", &SymbolFrame::symbols)
        .def_readwrite("baud_rate_hz", &SymbolFrame::baud_rate_hz)
        .def("__len__", [](const SymbolFrame& f) { return f.symbols.size(); });
    py::class_<CalibrationRecord>(m, "CalibrationRecord")
        .def_readonly("vacuum_variance", &CalibrationRecord::vacuum_variance)
        .def_readonly("electronic_variance", &CalibrationRecord::electronic_variance)
        .def_readonly("snu_scale", &CalibrationRecord::snu_scale)
        .def_readonly("clearance_db", &CalibrationRecord::clearance_db);
    m.def("snu_calibrate", [](const std::vector<SampleFrame>& vac,
                              const std::vector<SampleFrame>& ele) {
        return snu_calibrate(std::span(vac.data(), vac.size()),
                             std::span(ele.data(), ele.size()));
    });
    m.def("write_frame", &write_frame);
    m.def("read_frame", &read_frame);

    // tx dsp
    py::class_<ModulationConfig>(m, "ModulationConfig")
        .def(py::init<>())
        .def_readwrite("v_mod", &ModulationConfig::v_mod)
        .def_readwrite("baud_rate_hz", &ModulationConfig::baud_rate_hz)
        .def_readwrite("sample_rate_hz", &ModulationConfig::sample_rate_hz)
        .def_readwrite("rrc_rolloff", &ModulationConfig::rrc_rolloff)
        .def_readwrite("signal_center_hz", &ModulationConfig::signal_center_hz)
        .def_readwrite("pilot_freq_hz", &ModulationConfig::pilot_freq_hz)
        .def_readwrite("pilot_amplitude", &ModulationConfig::pilot_amplitude)
        .def_readwrite("dac_bits", &ModulationConfig::dac_bits);
    m.def("rrc_taps", &rrc_taps);
    m.def("generate_symbols", &generate_symbols, py::arg("count"), py::arg("cfg"),
          py::arg("seed"), py::arg("frame_id") = 0);
    m.def("synthesize_waveform", &synthesize_waveform);

    // channel
    py::class_<ChannelParams>(m, "ChannelParams")
        .def(py::init<>())
        .def_readwrite("length_km", &ChannelParams::length_km)
        .def_readwrite("atten_db_per_km", &ChannelParams::atten_db_per_km)
        .def_readwrite("coupling_transmittance", &ChannelParams::coupling_transmittance)
        .def_readwrite("linewidth_tx_hz", &ChannelParams::linewidth_tx_hz)
        .def_readwrite("linewidth_rx_hz", &ChannelParams::linewidth_rx_hz)
        .def_readwrite("freq_offset_hz", &ChannelParams::freq_offset_hz)
        .def("eta", &ChannelParams::eta);
    py::class_<DetectorModel>(m, "DetectorModel")
        .def(py::init<>())
        .def_readwrite("tau", &DetectorModel::tau)
        .def_readwrite("t_noise", &DetectorModel::t_noise)
        .def_readwrite("bandwidth_hz", &DetectorModel::bandwidth_hz)
        .def_readwrite("adc_bits", &DetectorModel::adc_bits);

    // security
    py::class_<LinkEstimate>(m, "LinkEstimate")
        .def(py::init<>())
        .def_readwrite("eta_hat", &LinkEstimate::eta_hat)
        .def_readwrite("xi_hat", &LinkEstimate::xi_hat)
        .def_readwrite("n_used", &LinkEstimate::n_used)
        .def_readwrite("eta_low", &LinkEstimate::eta_low)
        .def_readwrite("xi_up", &LinkEstimate::xi_up)
        .def_readwrite("delta_fail", &LinkEstimate::delta_fail)
        .def_readwrite("v_mod", &LinkEstimate::v_mod)
        .def_readwrite("tau", &LinkEstimate::tau)
        .def_readwrite("t_noise", &LinkEstimate::t_noise)
        .def_readwrite("resid_var", &LinkEstimate::resid_var);
    m.def("estimate_link", &estimate_link);
    m.def("worst_case_bounds", &worst_case_bounds);
    py::enum_<AncillaConvention>(m, "AncillaConvention")
        .value("quoted_t", AncillaConvention::quoted_t)
        .value("clearance", AncillaConvention::clearance);
    py::class_<SecurityParams>(m, "SecurityParams")
        .def(py::init<>())
        .def_readwrite("beta", &SecurityParams::beta)
        .def_readwrite("fer", &SecurityParams::fer)
        .def_readwrite("n_block", &SecurityParams::n_block)
        .def_readwrite("delta_fail", &SecurityParams::delta_fail)
        .def_readwrite("baud_hz", &SecurityParams::baud_hz)
        .def_readwrite("split_delta", &SecurityParams::split_delta)
        .def_readwrite("ancilla", &SecurityParams::ancilla);
    py::enum_<RateMode>(m, "RateMode")
        .value("asymptotic", RateMode::asymptotic)
        .value("finite", RateMode::finite);
    py::class_<SecurityReport>(m, "SecurityReport")
        .def_readonly("i_ab", &SecurityReport::i_ab)
        .def_readonly("chi_e", &SecurityReport::chi_e)
        .def_readonly("delta_n", &SecurityReport::delta_n)
        .def_readonly("skr_asymptotic_bps", &SecurityReport::skr_asymptotic_bps)
        .def_readonly("skr_finite_bps", &SecurityReport::skr_finite_bps)
        .def_readonly("negative_rate", &SecurityReport::negative_rate);
    m.def("mutual_information", &mutual_information);
    m.def("holevo_bound_trusted", &holevo_bound_trusted, py::arg("v_mod"), py::arg("eta"),
          py::arg("tau"), py::arg("t"), py::arg("xi"),
          py::arg("conv") = AncillaConvention::quoted_t);
    m.def("finite_size_delta", &finite_size_delta);
    m.def("secret_key_rate", &secret_key_rate);
    m.def("xi_rpn_model", &xi_rpn_model);

    // reconciliation
    m.def("md_map", &md_map);
    m.def("md_demap", &md_demap);
    m.def("md_apply", &md_apply);
    m.def("biawgn_capacity", &biawgn_capacity);
    m.def("toeplitz_extract", &toeplitz_extract);
    py::class_<LdpcCode>(m, "LdpcCode")
        .def_readonly("n", &LdpcCode::n)
        .def_readonly("m", &LdpcCode::m)
        .def_readonly("code_rate", &LdpcCode::code_rate)
        .def("effective_rate", &LdpcCode::effective_rate);
    m.def("demo_met_table_rate005", &demo_met_table_rate005);
    m.def("met_construct", &met_construct);
    m.def("rate_adapt", &rate_adapt);
    m.def("run_recon_blocks", [](const LdpcCode& code, double snr, int n_blocks, int d,
                                 uint64_t seed) {
        ReconConfig rc;
        rc.dimension = d;
        rc.seed = seed;
        auto r = run_recon_blocks(code, snr, n_blocks, rc);
        return py::make_tuple(r.beta, r.fer, r.snr_hat, r.agreement_ok);
    });
}
