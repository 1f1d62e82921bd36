// Stores a gaussian pulse in an ideal memory, recalls it and prints the
// echo next to the closed-form prediction.

#include <gem/gem.hpp>

#include <iostream>

int main()
{
    gem::Scenario sc;
    sc.name = "demo";
    sc.medium.eta = gem::eta_from_broadening(2.0, gem::broadening_convention::half_width_cyclic, 1.0);
    sc.medium.set_beta(3.3);
    sc.pulse.t_center = -4.0;

    const auto r = gem::run_scenario(sc);
    const auto& rep = r.report;
    std::cout << "efficiency   " << rep.efficiency << "\n"
              << "transmission " << rep.transmission << "\n"
              << "echo peak    " << rep.echo_peak_time << "\n"
              << "fidelity     " << rep.envelope_fidelity << "\n\n";

    const auto cmp = gem::compare_echo(r);
    std::cout << "t      |E_out| solver   closed form\n";
    for (std::size_t k = 0; k < cmp.times.size(); k += 50)
        std::cout << cmp.times[k] << "\t" << std::abs(cmp.solver[k]) << "\t" << std::abs(cmp.oracle[k]) << "\n";
}
