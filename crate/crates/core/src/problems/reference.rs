//! Recorded optimal values and minimisers of the Moré-Wild instances,
//! found by a finite-difference Levenberg-Marquardt run from each starting
//! point (see `problems::tests::lm`).

pub(crate) struct Reference {
    /// Starting value, checked against the problem definition in tests.
    #[cfg_attr(not(test), allow(dead_code))]
    pub f0: f64,
    pub f_star: f64,
    pub x_star: &'static [f64],
}

pub(crate) fn more_wild(index: usize) -> &'static Reference {
    &TABLE[index]
}

static TABLE: [Reference; 53] = [
    // linear_full_rank
    Reference { f0: 71.99999999999999, f_star: 35.999999999999986, x_star: &[-1.000000000358601, -1.0000000001943623, -1.000000000358601, -1.000000000358601, -1.000000000358601, -1.0000000001943623, -1.0000000003976186, -1.0000000003976186, -1.000000000318468] },
    // linear_full_rank_x10
    Reference { f0: 1125.0, f_star: 35.99999999999998, x_star: &[-0.9999999995560228, -0.9999999995560228, -1.0000000004441276, -1.0000000005773895, -0.9999999986678825, -0.9999999986678829, -0.9999999986678829, -0.9999999986677743, -0.9999999995560026] },
    // linear_rank1
    Reference { f0: 11654195.0, f_star: 8.380281690140844, x_star: &[-2.993963773965743, -0.9969818903800597, -0.33132126182569366, 0.001509053894780969, 0.20120724323236538, 0.33433936905346634, 0.42943374503827925] },
    // linear_rank1_x10
    Reference { f0: 1168591235.0, f_star: 8.380281690140844, x_star: &[-29.993963871633582, -9.996981873192835, -3.3313212617458317, 0.0015090627133537299, 2.001207245638327, 3.3343393685800073, 4.286576604841233] },
    // linear_rank1_zero
    Reference { f0: 4989195.0, f_star: 9.880597014925371, x_star: &[1.0, -0.9955223866586747, -0.33034825926464756, 0.002238805822411802, 0.20179104491100522, 0.33482587044493395, 1.0] },
    // linear_rank1_zero_x10
    Reference { f0: 500935635.0, f_star: 9.880597014925371, x_star: &[10.0, -9.995522379864296, -3.3303482656284387, 0.0022388102746408573, 2.001791043085752, 3.3348258699247997, 10.0] },
    // rosenbrock
    Reference { f0: 24.199999999999996, f_star: 0.0, x_star: &[1.0, 1.0] },
    // rosenbrock_x10
    Reference { f0: 1795769.0, f_star: 0.0, x_star: &[1.0, 1.0] },
    // helical_valley
    Reference { f0: 2500.0, f_star: 0.0, x_star: &[1.0, 1.3275171917581842e-166, 6.316968034234553e-166] },
    // helical_valley_x10
    Reference { f0: 10600.0, f_star: 0.0, x_star: &[1.0, 6.554365093594378e-175, 1.4640714317498768e-173] },
    // powell_singular
    Reference { f0: 215.00000000000003, f_star: 0.0, x_star: &[1.5492757381249941e-10, -1.5492757381249943e-11, 9.179028575523078e-11, 9.179028575523078e-11] },
    // powell_singular_x10
    Reference { f0: 1615400.0000000002, f_star: 0.0, x_star: &[1.5493797207377011e-10, -1.5493797207377014e-11, 9.17964465186289e-11, 9.17964465186289e-11] },
    // freudenstein_roth
    Reference { f0: 400.5, f_star: 48.984253679239984, x_star: &[11.412778992132983, -0.8968052529405877] },
    // freudenstein_roth_x10
    Reference { f0: 154575360.0, f_star: 48.98425367923999, x_star: &[11.412778976265363, -0.8968052546021511] },
    // bard
    Reference { f0: 41.68169586167801, f_star: 0.00821487730657897, x_star: &[0.08241055976462028, 1.1330360925209655, 2.34369517817032] },
    // bard_x10
    Reference { f0: 1306.2335498157597, f_star: 17.42869333744178, x_star: &[0.8406666667899825, -14624739374.803837, -15015762161.251114] },
    // kowalik_osborne
    Reference { f0: 0.00531317227210854, f_star: 0.0003075056038492367, x_star: &[0.19280693462414925, 0.19128232772178724, 0.12305650673883355, 0.13606233021361275] },
    // meyer
    Reference { f0: 1693607809.4361455, f_star: 87.94585517045049, x_star: &[0.005609636472152649, 6181.346346119675, 345.2236346185391] },
    // watson6
    Reference { f0: 16.430831175992274, f_star: 0.0022876700535523677, x_star: &[-0.015725087322773865, 1.0124348693044665, -0.23299162521413555, 1.2604300804094024, -1.5137289113811987, 0.9929964256936177] },
    // watson6_x10
    Reference { f0: 2323367.37205191, f_star: 0.0022876700535524024, x_star: &[-0.0157250863570855, 1.0124348693811258, -0.23299162612154856, 1.2604300885566078, -1.5137289237264242, 0.9929964329318351] },
    // watson9
    Reference { f0: 26.904166022417815, f_star: 1.3997601380956675e-6, x_star: &[-1.530702487437021e-5, 0.9997897038090299, 0.014763969128706768, 0.14634227521065118, 1.000821329858186, -2.6177316424607624, 4.104403765275433, -3.1436126479900324, 1.0526264995495076] },
    // watson9_x10
    Reference { f0: 8158876.625210726, f_star: 1.3997601380959652e-6, x_star: &[-1.5307037715188568e-5, 0.9997897038375354, 0.014763966816133877, 0.14634230233332762, 1.0008212007037869, -2.617731335167077, 4.1044033776327895, -3.143612399940264, 1.0526264361313487] },
    // watson12
    Reference { f0: 73.67820524905898, f_star: 4.722381101616629e-10, x_star: &[-6.638052723139792e-9, 1.0000016440963366, -0.0005639330443554232, 0.34782058167315033, -0.15673201308995266, 1.0528181779674428, -3.2472812061400873, 7.288455446274137, -10.271874390845243, 9.074133891497869, -4.541384200161376, 1.012013499386834] },
    // watson12_x10
    Reference { f0: 20593837.27330552, f_star: 4.72238110365112e-10, x_star: &[-6.6379001669166335e-9, 1.0000016441145987, -0.0005639343087117878, 0.3478205996938907, -0.15673213495630867, 1.0528186630013432, -3.24728245318648, 7.28845759282365, -10.27187685524524, 9.074135700385387, -4.541384965833004, 1.0120136411237997] },
    // box3d
    Reference { f0: 1031.1538106093983, f_star: 0.0, x_star: &[1.0, 10.0, 1.0] },
    // jennrich_sampson
    Reference { f0: 4171.306161960493, f_star: 124.36218235561478, x_star: &[0.2578252136224966, 0.25782521371810996] },
    // brown_dennis
    Reference { f0: 7926693.336997432, f_star: 85822.20162636231, x_star: &[-11.594437802797026, 13.203629264648601, -0.40343958305863026, 0.23677877020403026] },
    // brown_dennis_x10
    Reference { f0: 308106428512.94086, f_star: 85822.20162636205, x_star: &[-11.594441954951773, 13.20363081914367, -0.4034393330312619, 0.23677896326099784] },
    // chebyquad6
    Reference { f0: 0.04642817229746083, f_star: 0.0, x_star: &[0.06687659094608972, 0.3666822992416477, 0.28874067311944424, 0.7112593268805558, 0.6333177007583524, 0.9331234090539103] },
    // chebyquad7
    Reference { f0: 0.033770638463718826, f_star: 0.0, x_star: &[0.0580691496209755, 0.3380440947400462, 0.23517161235742162, 0.5, 0.7648283876425784, 0.6619559052599538, 0.9419308503790246] },
    // chebyquad8
    Reference { f0: 0.03861769828593027, f_star: 0.0035168737256779234, x_star: &[0.04315276036489322, 0.19309084060107637, 0.26632870684128457, 0.5000000001584121, 0.4999999998409529, 0.7336712931581592, 0.8069091593982594, 0.9568472396346701] },
    // chebyquad9
    Reference { f0: 0.028882980288225977, f_star: 0.0, x_star: &[0.04420534613578276, 0.23561910847106002, 0.1994906723098809, 0.416046907892598, 0.5, 0.583953092107402, 0.8005093276901191, 0.76438089152894, 0.9557946538642172] },
    // chebyquad10
    Reference { f0: 0.03376326546288008, f_star: 0.006503954800882302, x_star: &[0.059619900406820005, 0.16670828166009785, 0.23917065881890984, 0.39888429656647656, 0.39888428791708647, 0.6011157120904084, 0.6011157034283912, 0.7608293411827375, 0.8332917183415509, 0.940380099594365] },
    // chebyquad11
    Reference { f0: 0.026740603262178475, f_star: 0.0027997615518657554, x_star: &[0.02995874490689945, 0.13731120703794114, 0.18836638900103356, 0.3588431172691116, 0.3588431175412642, 0.5000000000000095, 0.6411568824614208, 0.6411568827282562, 0.8116336109990568, 0.8626887929619025, 0.970041255093031] },
    // brown_almost_linear
    Reference { f0: 273.2480478286743, f_star: 0.0, x_star: &[0.9794303033498633, 0.9794303033498633, 0.9794303033498633, 0.9794303033498633, 0.9794303033498633, 0.9794303033498633, 0.9794303033498633, 0.9794303033498633, 0.9794303033498633, 1.2056969665013673] },
    // osborne1
    Reference { f0: 0.8790262935446405, f_star: 5.4648946974825794e-5, x_star: &[0.37541005209528083, 1.935846911283852, -1.4646871351766286, 0.012867534637193947, 0.022122699667524528] },
    // osborne2
    Reference { f0: 2.093419514212065, f_star: 0.04013773629354772, x_star: &[1.3099771543912664, 0.43155379410556516, 0.6336616987795904, 0.5994305344355196, 0.7541832250354059, 0.9042885833970683, 1.3658118333256215, 4.823698819888178, 2.398684866330923, 4.568874597615567, 5.675341470636465] },
    // osborne2_x10
    Reference { f0: 199.6846790485486, f_star: 1.789813586881093, x_star: &[0.9170384196333746, 6.5, 6.5, 7.0, 0.13275478148657888, 30.0, 50.0, 70.0, 20.0, 45.0, 55.0] },
    // bdqrtic8
    Reference { f0: 904.0, f_star: 10.38355269354123, x_star: &[0.6204518218353589, 0.49234917419600865, 0.40192877651243747, 0.3436711909585693, -0.06303887655925314, 0.011993948286060227, 0.2097395166993691, 4.5299786876535614e-9] },
    // bdqrtic10
    Reference { f0: 1356.0, f_star: 18.332571407236088, x_star: &[0.6265513147340599, 0.48512818237273453, 0.36954227781115495, 0.2927237179582219, 0.3401257212039237, 0.3825403619514272, 5.189037057488009e-14, 0.008658239279478007, 0.15686826844117663, 2.2712742633721858e-8] },
    // bdqrtic11
    Reference { f0: 1582.0, f_star: 22.857211573028522, x_star: &[0.6341365742028781, 0.5009014531275713, 0.39103700998546564, 0.3052095851995476, 0.3456270338507571, 0.3706229372880619, 0.40722283971512974, -0.025668847771225883, 0.1462932966734899, 0.25423388782105266, -2.7791690183137995e-8] },
    // bdqrtic12
    Reference { f0: 1808.0, f_star: 26.504047463605808, x_star: &[0.6283303378268258, 0.48891549839433457, 0.37872277096996493, 0.3010880652326032, 0.3310185705938347, 0.3409215252511231, 0.3550797186451051, 0.3866645921755651, 2.3005775126788775e-7, 0.08530032272261766, 0.2217210951601099, 1.4476915629197978e-12] },
    // cube5
    Reference { f0: 56.5, f_star: 0.0, x_star: &[1.0, 1.0, 1.0, 1.0, 1.0] },
    // cube6
    Reference { f0: 70.5625, f_star: 0.0, x_star: &[1.0, 1.0, 1.0, 1.0, 1.0, 1.0] },
    // cube8
    Reference { f0: 98.6875, f_star: 0.0, x_star: &[1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0] },
    // mancino5
    Reference { f0: 2539084359.25047, f_star: 0.0, x_star: &[84.28291101102532, 79.20603967293438, 74.33641411353109, 69.67114741121779, 65.20718113814443] },
    // mancino5_x10
    Reference { f0: 6873795260334.307, f_star: 0.0, x_star: &[84.28291101102532, 79.20603967293438, 74.33641411353109, 69.67114741121779, 65.20718113814443] },
    // mancino8
    Reference { f0: 3367961145.859085, f_star: 0.0, x_star: &[84.43334222593528, 79.33454939399172, 74.44387011026309, 69.7592945870252, 65.27853533617876, 60.9988580578957, 56.916937935443194, 53.028761291567214] },
    // mancino10
    Reference { f0: 3735127013.2708926, f_star: 0.0, x_star: &[84.53434289477315, 79.42084435375007, 74.51601545241338, 69.81844699647671, 65.32637991893166, 61.03748806452532, 56.94869518846037, 53.056052319528746, 49.354695084619586, 45.83889035077596] },
    // mancino12
    Reference { f0: 3991072354.222331, f_star: 0.0, x_star: &[84.63591921594157, 79.50764231052248, 74.5885724920863, 69.87791406833868, 65.3744482468492, 61.076265307889024, 56.980540884282135, 53.08338921660163, 49.3798168105237, 45.86378591833199, 42.5283822593979, 39.36606891417027] },
    // mancino12_x10
    Reference { f0: 11300149979351.404, f_star: 0.0, x_star: &[84.63591921594157, 79.50764231052248, 74.5885724920863, 69.87791406833868, 65.3744482468492, 61.076265307889024, 56.98054088428212, 53.08338921660164, 49.3798168105237, 45.86378591833199, 42.5283822593979, 39.36606891417027] },
    // heart8
    Reference { f0: 10.9662338426275, f_star: 0.0, x_star: &[-0.3162155631162641, -0.3737844368837358, 0.3384631828914398, -0.3824631828914399, -1.250722398579327, 2.451515775519097, 1.5060534179177596, -1.410373166886025] },
    // heart8_x10
    Reference { f0: 33658314110.004883, f_star: 0.0, x_star: &[-0.3162155631162641, -0.3737844368837358, 0.33846318289143984, -0.3824631828914399, -1.2507223985793272, 2.451515775519097, 1.5060534179177596, -1.410373166886025] },
];
