#!/usr/bin/env python3
"""Writes the bundled MedPix-style fixture under fixtures/medpix/.

Output is deterministic: rerunning produces byte-identical files.
Usage: gen_medpix_fixture.py [output-dir]
"""

import json
import math
import struct
import sys
import zlib
from pathlib import Path

PAGE_SIZE = 5
IMAGE_HOST = "https://medpix.example.org/images/"


# ----------------------------------------------------------------- images

def png_gray(width, height, pixel):
    rows = bytearray()
    for y in range(height):
        rows.append(0)
        rows.extend(pixel(x, y) for x in range(width))

    def chunk(tag, data):
        body = tag + data
        return struct.pack(">I", len(data)) + body + struct.pack(">I", zlib.crc32(body) & 0xFFFFFFFF)

    header = struct.pack(">IIBBBBB", width, height, 8, 0, 0, 0, 0)
    return (b"\x89PNG\r\n\x1a\n" + chunk(b"IHDR", header) +
            chunk(b"IDAT", zlib.compress(bytes(rows), 9)) + chunk(b"IEND", b""))


def synthetic_image(seed, width=320, height=240):
    """Smooth background with a few bright ellipses, keyed by seed."""
    blobs = []
    s = seed * 7919 + 17
    for _ in range(3):
        s = (s * 1103515245 + 12345) % (1 << 31)
        cx = 40 + s % (width - 80)
        s = (s * 1103515245 + 12345) % (1 << 31)
        cy = 30 + s % (height - 60)
        s = (s * 1103515245 + 12345) % (1 << 31)
        r = 15 + s % 40
        blobs.append((cx, cy, r))

    def pixel(x, y):
        v = 30 + (x * 60) // width + (y * 40) // height
        for cx, cy, r in blobs:
            if (x - cx) ** 2 + ((y - cy) * 1.3) ** 2 < r * r:
                v += 90
        v += int(12 * math.sin((x + seed * 13) / 9.0))
        return max(0, min(255, v))

    return png_gray(width, height, pixel)


# ------------------------------------------------------------------ data

XR = "XR - Plain Film"
CT = "CT - Noncontrast"
CTC = "CT - Contrast"
MR = "MR - T2 weighted"
US = "US - Ultrasound"


def tech(kind, date):
    if kind == "ct":
        return {"Manufacturer": "Siemens", "Model": "SOMATOM Definition AS", "StationName": "CT02",
                "AcquisitionDate": date, "KVP": "120", "ExposureTime": "500", "TubeCurrent": "210",
                "SliceThickness": "3.0", "PixelSpacing": "0.74\\0.74", "MatrixSize": "512x512",
                "FieldOfView": "380", "ContrastAgent": "Iohexol 350", "WindowSettings": "W400 L40"}
    if kind == "mr":
        return {"Manufacturer": "GE", "Model": "Signa HDxt", "StationName": "MR01",
                "AcquisitionDate": date, "SliceThickness": "5.0", "PixelSpacing": "0.47\\0.47",
                "MatrixSize": "320x224", "FieldOfView": "240", "RepetitionTime": "4000",
                "EchoTime": "102", "FlipAngle": "90", "MagneticFieldStrength": "1.5"}
    if kind == "xr":
        return {"Manufacturer": "Philips", "Model": "DigitalDiagnost", "AcquisitionDate": date,
                "KVP": "55", "ExposureTime": "12", "TubeCurrent": "250", "PixelSpacing": "0.15\\0.15"}
    return {"Manufacturer": "Philips", "Model": "EPIQ 7", "AcquisitionDate": date}


def author(name, email):
    return {"Name": name, "Affiliation": "Department of Radiology", "Email": email,
            "Institution": "Uniformed Services University"}


CASES = [
    {
        "id": "MPX1001",
        "Title": "Acute appendicitis",
        "Sex": "female", "Age": "24", "Ethnicity": "Hispanic",
        "History": "Twelve hours of periumbilical pain migrating to the right lower quadrant with nausea.",
        "Exam": "Tenderness at McBurney point with rebound. Temperature 38.2 C.",
        "Findings": "Dilated appendix measuring 11 mm with wall enhancement, periappendiceal fat stranding and an obstructing appendicolith.",
        "DifferentialDiagnosis": "Acute appendicitis; mesenteric adenitis; right ovarian torsion; terminal ileitis",
        "Diagnosis": {"Name": "Acute appendicitis", "Certainty": "Confirmed by pathology", "ICD10": "K35.80"},
        "DiagnosisMethod": "Surgical pathology",
        "Treatment": "Laparoscopic appendectomy.",
        "Discussion": "An appendiceal diameter above 6 mm with periappendiceal inflammation is the most reliable CT sign. An appendicolith raises the risk of perforation.",
        "FollowUp": "Uneventful recovery; discharged on postoperative day two.",
        "TeachingPoints": "Look for the appendicolith and for extraluminal gas, which suggests perforation.",
        "Keywords": "appendix; appendicolith; right lower quadrant pain",
        "ACRCode": "7.2",
        "Category": "Gastrointestinal",
        "Location": "Abdomen",
        "Author": author("J. Rivera", "jrivera@example.org"),
        "Citation": {"Title": "CT of appendicitis", "Authors": "Pinto Leite N, Pereira JM",
                     "Journal": "AJR", "Year": "2005", "PubMedId": "16037510"},
        "Acknowledgements": "Images courtesy of the emergency radiology section.",
        "Created": "2016-03-04", "Modified": "2018-11-20",
        "topics": ["T01"], "questions": ["Q01"],
        "images": [
            {"file": "MPX1001-1.png", "Caption": "Axial contrast CT through the right lower quadrant",
             "Modality": CTC, "Plane": "Axial", "Location": "Right lower quadrant", "Contrast": "IV and oral",
             "Legend": "Arrow: appendicolith", "ImageNumber": "1", "TechnicalDetails": tech("ct", "2016-03-02"),
             "source_url": IMAGE_HOST + "MPX1001-1.png"},
            {"file": "MPX1001-2.png", "Caption": "Coronal reformat showing the dilated appendix",
             "Modality": CTC, "Plane": "Coronal", "ImageNumber": "2", "TechnicalDetails": tech("ct", "2016-03-02")},
        ],
    },
    {
        "id": "MPX1002",
        "Title": "Acute on chronic subdural hematoma",
        "Sex": "male", "Age": "78", "Ethnicity": "Caucasian",
        "History": "Progressive confusion over two weeks after a fall. On warfarin for atrial fibrillation.",
        "Exam": "Disoriented, mild left pronator drift.",
        "Findings": "Right convexity crescentic extra-axial collection of mixed density with 8 mm leftward midline shift.",
        "DifferentialDiagnosis": "Subdural hematoma; subdural hygroma; empyema",
        "Diagnosis": {"Name": "Acute on chronic subdural hematoma", "Certainty": "Confirmed at surgery", "ICD10": "S06.5X0A"},
        "DiagnosisMethod": "Imaging and operative findings",
        "Treatment": "Anticoagulation reversal and burr hole evacuation.",
        "Discussion": "Mixed density reflects rebleeding into a chronic collection. Subdural collections cross sutures but not the dural reflections.",
        "TeachingPoints": "Crescentic shape and crossing of sutures separate subdural from epidural blood.",
        "Keywords": "subdural; hematoma; midline shift",
        "ACRCode": "1.4",
        "Category": "Neuroradiology",
        "Location": "Brain",
        "Author": author("M. Chen", "mchen@example.org"),
        "Citation": {"Title": "Imaging of subdural hematoma", "Authors": "Lee KS",
                     "Journal": "Radiographics", "Year": "2011", "PubMedId": "21415191"},
        "Created": "2015-07-19", "Modified": "2017-01-08",
        "topics": ["T02"], "questions": ["Q02"],
        "images": [
            {"file": "MPX1002-1.png", "Caption": "Noncontrast head CT", "Modality": CT, "Plane": "Axial",
             "Location": "Right convexity", "ImageNumber": "1", "TechnicalDetails": tech("ct", "2015-07-18"),
             "source_url": IMAGE_HOST + "MPX1002-1.png"},
        ],
    },
    {
        "id": "MPX1003",
        "Title": "Primary spontaneous pneumothorax",
        "Sex": "male", "Age": "19", "Ethnicity": "Caucasian",
        "History": "Sudden left pleuritic chest pain while at rest. Tall, thin habitus.",
        "Exam": "Decreased breath sounds on the left.",
        "Findings": "Visible visceral pleural line at the left apex with absent lung markings peripherally. No mediastinal shift.",
        "DifferentialDiagnosis": "Pneumothorax; skin fold; bulla",
        "Dx": {"Name": "Left primary spontaneous pneumothorax", "Certainty": "Imaging diagnosis"},
        "DiagnosisMethod": "Chest radiograph",
        "Treatment": "Needle aspiration.",
        "Discussion": "Apical subpleural blebs are the usual source. Skin folds extend beyond the chest wall and lack a sharp white line.",
        "FollowUp": "Full re-expansion at 24 hours.",
        "TeachingPoints": "Look for the white visceral pleural line, not only the absence of markings.",
        "Keywords": "pneumothorax; pleura",
        "ACRCode": "6.8",
        "Category": "Chest",
        "Location": "Chest",
        "Author": author("A. Novak", "anovak@example.org"),
        "Created": "2017-02-11", "Modified": "2017-02-11",
        "images": [
            {"file": "MPX1003-1.png", "Caption": "Upright PA chest radiograph", "Modality": XR, "Plane": "Frontal",
             "ImageNumber": "1", "TechnicalDetails": tech("xr", "2017-02-10")},
        ],
    },
    {
        "id": "MPX1004",
        "Title": "Conventional osteosarcoma of the distal femur",
        "Sex": "male", "Age": "15", "Ethnicity": "African American",
        "History": "Three months of knee pain, worse at night, with a firm swelling.",
        "Exam": "Tender fixed mass above the knee.",
        "Findings": "Mixed lytic and sclerotic metaphyseal lesion with sunburst periosteal reaction and a Codman triangle. Marrow replacement and soft tissue mass on MRI.",
        "DifferentialDiagnosis": "Osteosarcoma; Ewing sarcoma; osteomyelitis",
        "Diagnosis": {"Name": "Conventional osteosarcoma", "Certainty": "Confirmed by biopsy", "ICD10": "C40.21"},
        "DiagnosisMethod": "Core needle biopsy",
        "Treatment": "Neoadjuvant chemotherapy and limb-salvage resection.",
        "Discussion": "Osteosarcoma favours the metaphysis of the distal femur and proximal tibia in adolescents. MRI defines marrow extent and skip lesions.",
        "FollowUp": "No recurrence at two years.",
        "TeachingPoints": "Image the whole bone to exclude skip metastases.",
        "Keywords": "osteosarcoma; periosteal reaction; Codman triangle",
        "ACRCode": "4.3",
        "Category": "Musculoskeletal",
        "Location": "Knee",
        "Author": author("R. Okafor", "rokafor@example.org"),
        "Citation": {"Title": "Osteosarcoma: imaging review", "Authors": "Murphey MD",
                     "Journal": "Radiographics", "Year": "1997", "PubMedId": "9308102"},
        "Created": "2014-09-30", "Modified": "2019-05-14",
        "topics": ["T06"], "questions": ["Q07"],
        "images": [
            {"file": "MPX1004-1.png", "Caption": "Lateral knee radiograph", "Modality": XR, "Plane": "Lateral",
             "Location": "Distal femur", "ImageNumber": "1", "TechnicalDetails": tech("xr", "2014-09-28")},
            {"file": "MPX1004-2.png", "Caption": "Coronal T2 MRI", "Modality": MR, "Plane": "Coronal",
             "Location": "Distal femur", "ImageNumber": "2", "TechnicalDetails": tech("mr", "2014-09-29"),
             "source_url": IMAGE_HOST + "MPX1004-2.png"},
        ],
    },
    {
        "id": "MPX1005",
        "Title": "Acute pulmonary embolism",
        "Sex": "female", "Age": "46", "Ethnicity": "Asian",
        "History": "Dyspnea and pleuritic pain five days after a long-haul flight.",
        "Exam": "Tachycardia 118, oxygen saturation 89 percent on room air.",
        "Findings": "Filling defects in the right main and left lower lobe pulmonary arteries. RV to LV ratio 1.1.",
        "DifferentialDiagnosis": "Pulmonary embolism; mixing artifact; in situ thrombosis",
        "Diagnosis": {"Name": "Acute pulmonary embolism", "Certainty": "Imaging diagnosis", "ICD10": "I26.99"},
        "DiagnosisMethod": "CT pulmonary angiography",
        "Treatment": "Anticoagulation with low molecular weight heparin.",
        "Discussion": "Acute emboli are central filling defects with an acute angle to the vessel wall. An RV to LV ratio above 1 indicates right heart strain.",
        "TeachingPoints": "Check the RV to LV ratio on every positive study.",
        "Keywords": "pulmonary embolism; CT angiography",
        "ACRCode": "6.9",
        "Category": "Chest",
        "Location": "Chest",
        "Author": author("J. Rivera", "jrivera@example.org"),
        "Created": "2018-01-22", "Modified": "2018-02-02",
        "topics": ["T04"], "questions": ["Q03"],
        "images": [
            {"file": "MPX1005-1.png", "Caption": "CT pulmonary angiogram", "Modality": CTC, "Plane": "Axial",
             "Contrast": "IV", "ImageNumber": "1", "TechnicalDetails": tech("ct", "2018-01-21")},
            {"file": "MPX1005-2.png", "Caption": "Portable chest radiograph on admission", "Modality": XR,
             "Plane": "Frontal", "ImageNumber": "2"},
        ],
    },
    {
        "id": "MPX1006",
        "Title": "Relapsing remitting multiple sclerosis",
        "Sex": "female", "Age": "31", "Ethnicity": "Caucasian",
        "History": "Painful monocular visual loss one year after transient leg numbness.",
        "Exam": "Relative afferent pupillary defect on the right.",
        "Findings": "Multiple ovoid periventricular T2 hyperintensities perpendicular to the lateral ventricles, with juxtacortical and infratentorial lesions.",
        "DifferentialDiagnosis": "Multiple sclerosis; ADEM; small vessel disease; neuromyelitis optica",
        "Diagnosis": {"Name": "Multiple sclerosis, relapsing remitting", "Certainty": "Clinical and imaging", "ICD10": "G35"},
        "DiagnosisMethod": "McDonald criteria",
        "Treatment": "Disease-modifying therapy.",
        "Discussion": "Dissemination in space and time can be shown on a single MRI. Lesions perpendicular to the ventricles follow the medullary veins.",
        "FollowUp": "Stable on follow-up MRI at one year.",
        "TeachingPoints": "Dawson fingers are characteristic of demyelination.",
        "Keywords": "multiple sclerosis; demyelination; Dawson fingers",
        "ACRCode": "1.3",
        "Category": "Neuroradiology",
        "Location": "Brain",
        "Author": author("M. Chen", "mchen@example.org"),
        "Citation": {"Title": "MRI criteria in multiple sclerosis", "Authors": "Filippi M",
                     "Journal": "Lancet Neurol", "Year": "2016", "PubMedId": "26822746"},
        "Created": "2016-10-05", "Modified": "2020-03-17",
        "topics": ["T05"], "questions": ["Q04"],
        "images": [
            {"file": "MPX1006-1.png", "Caption": "Sagittal FLAIR", "Modality": MR, "Plane": "Sagittal",
             "Location": "Periventricular white matter", "ImageNumber": "1",
             "TechnicalDetails": dict(tech("mr", "2016-10-01"), ContrastAgent="Gadobutrol")},
        ],
    },
    {
        "id": "MPX1007",
        "Title": "Stress fracture of the second metatarsal",
        "Sex": "female", "Age": "22", "Ethnicity": "Caucasian",
        "History": "Military recruit with forefoot pain after a month of marching drills.",
        "Exam": "Point tenderness over the second metatarsal shaft with mild swelling.",
        "Findings": "Fluffy periosteal callus and a faint transverse lucent line at the distal second metatarsal diaphysis.",
        "DifferentialDiagnosis": "Stress fracture; osteoid osteoma; osteomyelitis",
        "Diagnosis": {"Name": "Healing stress fracture, second metatarsal", "Certainty": "Imaging diagnosis", "ICD10": "M84.374A"},
        "DiagnosisMethod": "Radiograph",
        "Treatment": "Protected weight bearing in a walking boot for six weeks.",
        "Discussion": "March fractures favour the second and third metatarsal shafts. Early radiographs are often normal and callus appears after two to three weeks.",
        "FollowUp": "Return to training at eight weeks.",
        "TeachingPoints": "Periosteal callus may be the only sign of a stress fracture.",
        "Keywords": "stress fracture; march fracture; metatarsal",
        "ACRCode": "4.4",
        "Category": "Musculoskeletal",
        "Location": "Foot",
        "Author": author("R. Okafor", "rokafor@example.org"),
        "Citation": {"Title": "Stress fractures: imaging", "Authors": "Berger FH",
                     "Journal": "Radiographics", "Year": "2007", "PubMedId": "17374862"},
        "Acknowledgements": "Case contributed by the sports medicine clinic.",
        "Created": "2019-06-12", "Modified": "2019-07-01",
        "topics": ["T03", "T06"], "questions": ["Q05"],
        "images": [
            {"file": "MPX1007-1.png", "Caption": "AP radiograph of the left foot", "Modality": XR, "Plane": "AP",
             "Location": "Forefoot", "Legend": "Callus at the distal second metatarsal", "ImageNumber": "1",
             "TechnicalDetails": tech("xr", "2019-06-10"), "source_url": IMAGE_HOST + "MPX1007-1.png"},
        ],
    },
    {
        "id": "MPX1008",
        "Title": "Clear cell renal cell carcinoma",
        "Sex": "male", "Age": "61", "Ethnicity": "Caucasian",
        "History": "Painless hematuria. Smoker.",
        "Exam": "Unremarkable.",
        "Findings": "Heterogeneous avidly enhancing 5 cm exophytic mass of the left kidney with central necrosis. Renal vein patent.",
        "DifferentialDiagnosis": "Renal cell carcinoma; oncocytoma; lipid-poor angiomyolipoma",
        "Dx": {"Name": "Clear cell renal cell carcinoma", "Certainty": "Confirmed by pathology"},
        "DiagnosisMethod": "Partial nephrectomy pathology",
        "Treatment": "Partial nephrectomy.",
        "Discussion": "Avid heterogeneous enhancement suggests the clear cell subtype. Assess the renal vein and IVC for tumour thrombus.",
        "TeachingPoints": "An enhancing solid renal mass is carcinoma until proven otherwise.",
        "Keywords": "renal mass; hematuria",
        "ACRCode": "8.3",
        "Category": "Genitourinary",
        "Location": "Kidney",
        "Author": author("A. Novak", "anovak@example.org"),
        "Created": "2013-04-18", "Modified": "2016-08-09",
        "images": [
            {"file": "MPX1008-1.png", "Caption": "Nephrographic phase CT", "Modality": CTC, "Plane": "Axial",
             "Contrast": "IV", "ImageNumber": "1", "TechnicalDetails": tech("ct", "2013-04-15")},
        ],
    },
    {
        "id": "MPX1009",
        "Title": "Scaphoid waist fracture",
        "Sex": "male", "Age": "27", "Ethnicity": "Hispanic",
        "History": "Fall on the outstretched hand during football.",
        "Exam": "Anatomical snuffbox tenderness.",
        "Findings": "Nondisplaced lucent fracture line through the scaphoid waist on the scaphoid view.",
        "DifferentialDiagnosis": "Scaphoid fracture; scapholunate ligament injury",
        "Diagnosis": {"Name": "Nondisplaced scaphoid waist fracture", "Certainty": "Imaging diagnosis", "ICD10": "S62.025A"},
        "DiagnosisMethod": "Radiograph",
        "Treatment": "Thumb spica cast.",
        "Discussion": "The proximal pole depends on retrograde blood flow, so waist fractures risk avascular necrosis and nonunion.",
        "FollowUp": "Union on CT at ten weeks.",
        "TeachingPoints": "Treat clinically suspected scaphoid fractures even with normal initial films.",
        "Keywords": "scaphoid; wrist; avascular necrosis",
        "ACRCode": "4.4",
        "Category": "Musculoskeletal",
        "Location": "Wrist",
        "Author": author("R. Okafor", "rokafor@example.org"),
        "Created": "2018-09-03", "Modified": "2018-09-03",
        "topics": ["T03"], "questions": ["Q06"],
        "images": [
            {"file": "MPX1009-1.png", "Caption": "PA ulnar deviated scaphoid view", "Modality": XR, "Plane": "PA",
             "Location": "Wrist", "ImageNumber": "1", "TechnicalDetails": tech("xr", "2018-09-01")},
        ],
    },
    {
        "id": "MPX1010",
        "Title": "Hepatic cavernous hemangioma",
        "Sex": "female", "Age": "42", "Ethnicity": "Asian",
        "History": "Incidental liver lesion on ultrasound.",
        "Exam": "Normal.",
        "Findings": "4 cm markedly T2 hyperintense lesion with peripheral nodular discontinuous enhancement and centripetal fill-in.",
        "DifferentialDiagnosis": "Hemangioma; hypervascular metastasis; focal nodular hyperplasia",
        "Dx": {"Name": "Cavernous hemangioma", "Certainty": "Imaging diagnosis"},
        "DiagnosisMethod": "Dynamic contrast MRI",
        "Treatment": "None required.",
        "Discussion": "Peripheral nodular enhancement matching the blood pool with progressive fill-in is diagnostic.",
        "TeachingPoints": "Enhancing nodules should follow the blood pool on every phase.",
        "Keywords": "liver; hemangioma",
        "ACRCode": "7.6",
        "Category": "Gastrointestinal",
        "Location": "Liver",
        "Author": author("J. Rivera", "jrivera@example.org"),
        "Created": "2017-11-27", "Modified": "2018-03-30",
        "images": [
            {"file": "MPX1010-1.png", "Caption": "Axial T2 MRI of the liver", "Modality": MR, "Plane": "Axial",
             "Location": "Right hepatic lobe", "ImageNumber": "1", "TechnicalDetails": tech("mr", "2017-11-20")},
        ],
    },
    {
        "id": "MPX1011",
        "Title": "Complete Achilles tendon rupture",
        "Sex": "male", "Age": "38", "Ethnicity": "African American",
        "History": "Felt a pop in the heel while playing squash.",
        "Exam": "Palpable gap and positive Thompson test.",
        "Findings": "Full-thickness tear of the Achilles tendon 5 cm above the calcaneal insertion with a 2 cm gap filled by hematoma.",
        "DifferentialDiagnosis": "Complete rupture; partial tear; plantaris tear",
        "Diagnosis": {"Name": "Complete Achilles tendon rupture", "Certainty": "Imaging diagnosis", "ICD10": "S86.011A"},
        "DiagnosisMethod": "Ultrasound and MRI",
        "Treatment": "Operative repair.",
        "Discussion": "Ruptures occur in the hypovascular zone 2 to 6 cm above the insertion. Measure the gap with the foot in plantar flexion.",
        "TeachingPoints": "Report gap size and tendon quality for surgical planning.",
        "Keywords": "Achilles tendon; rupture",
        "ACRCode": "4.5",
        "Category": "Musculoskeletal",
        "Location": "Ankle",
        "Author": author("A. Novak", "anovak@example.org"),
        "Created": "2020-02-14", "Modified": "2020-02-20",
        "questions": ["Q08"],
        "images": [
            {"file": "MPX1011-1.png", "Caption": "Longitudinal ultrasound of the tendon", "Modality": US,
             "Plane": "Sagittal", "Location": "Posterior ankle", "ImageNumber": "1",
             "TechnicalDetails": tech("us", "2020-02-14")},
        ],
    },
    {
        "id": "MPX1012",
        "Title": "Ileocolic intussusception",
        "Sex": "male", "Age": "2", "Ethnicity": "Caucasian",
        "History": "Intermittent colicky pain with drawing up of the legs and red currant jelly stool.",
        "Exam": "Sausage-shaped mass in the right upper quadrant.",
        "Findings": "Target sign of concentric bowel wall layers measuring 3.5 cm in the right upper quadrant.",
        "DifferentialDiagnosis": "Intussusception; volvulus; gastroenteritis",
        "Dx": {"Name": "Ileocolic intussusception", "Certainty": "Confirmed at reduction"},
        "DiagnosisMethod": "Ultrasound",
        "Treatment": "Pneumatic reduction under fluoroscopy.",
        "Discussion": "Ultrasound is the first-line test. Ileocolic intussusception is most common between six months and three years.",
        "FollowUp": "Successful reduction without recurrence.",
        "TeachingPoints": "A target sign over 2.5 cm in the right abdomen favours ileocolic intussusception.",
        "Keywords": "intussusception; target sign; pediatric",
        "ACRCode": "7.2",
        "Category": "Pediatric",
        "Location": "Abdomen",
        "Author": author("M. Chen", "mchen@example.org"),
        "Created": "2019-12-01", "Modified": "2019-12-01",
        "images": [
            {"file": "MPX1012-1.png", "Caption": "Transverse ultrasound of the right upper quadrant", "Modality": US,
             "Plane": "Transverse", "ImageNumber": "1", "TechnicalDetails": tech("us", "2019-11-30"),
             "source_url": IMAGE_HOST + "MPX1012-1.png"},
        ],
    },
]

# MPX1005-2 is the same radiograph file as MPX1003-1 under another name.
IMAGE_SEEDS = {"MPX1005-2.png": "MPX1003-1.png"}

TOPICS = [
    {"id": "T01", "Title": "Appendicitis", "Category": "Gastrointestinal",
     "Definition": "Acute inflammation of the vermiform appendix.",
     "Etiology": "Luminal obstruction by an appendicolith, lymphoid hyperplasia or tumour.",
     "Epidemiology": "Lifetime risk about 7 percent; peak in the second and third decades.",
     "Pathophysiology": "Obstruction leads to distension, ischemia and bacterial invasion of the wall.",
     "ClinicalFindings": "Periumbilical pain migrating to the right lower quadrant, fever, leukocytosis.",
     "ImagingFindings": "Appendix over 6 mm, wall enhancement, periappendiceal stranding, appendicolith.",
     "DifferentialDiagnosis": "Mesenteric adenitis, Crohn disease, ovarian pathology.",
     "Treatment": "Appendectomy; antibiotics in selected uncomplicated cases.",
     "Prognosis": "Excellent when treated before perforation.",
     "Keywords": "appendix", "ACRCode": "7.2",
     "Reference": [{"Citation": "Pinto Leite N et al. CT evaluation of appendicitis. AJR 2005.",
                    "URL": "https://pubmed.ncbi.nlm.nih.gov/16037510/", "Year": "2005"}]},
    {"id": "T02", "Title": "Intracranial hemorrhage", "Category": "Neuroradiology",
     "Definition": "Bleeding within the cranial vault, including epidural, subdural, subarachnoid and parenchymal blood.",
     "Etiology": "Trauma, hypertension, amyloid angiopathy, vascular malformations, anticoagulation.",
     "Epidemiology": "Subdural hematoma is most common in the elderly after minor trauma.",
     "ClinicalFindings": "Headache, confusion, focal deficits, reduced consciousness.",
     "ImagingFindings": "Hyperdense extra-axial or intra-axial blood on noncontrast CT with mass effect.",
     "Treatment": "Reversal of anticoagulation, surgical evacuation when indicated.",
     "Prognosis": "Depends on volume, location and midline shift.",
     "Keywords": "hemorrhage; subdural", "ACRCode": "1.4"},
    {"id": "T03", "Title": "Stress fracture", "Category": "Musculoskeletal",
     "Definition": "Fracture from repetitive submaximal loading of normal bone.",
     "Etiology": "Abrupt increase in activity such as marching or running.",
     "Epidemiology": "Common in military recruits and endurance athletes.",
     "Pathophysiology": "Remodelling cannot keep pace with microdamage.",
     "ClinicalFindings": "Activity-related pain and focal tenderness.",
     "ImagingFindings": "Early radiographs normal; later periosteal callus and sclerotic band. MRI shows marrow edema.",
     "DifferentialDiagnosis": "Osteoid osteoma, osteomyelitis, tumour.",
     "Treatment": "Rest and protected weight bearing.",
     "Prognosis": "Good; high-risk sites may need fixation.",
     "Keywords": "stress fracture; fatigue fracture", "ACRCode": "4.4",
     "Reference": [{"Citation": "Berger FH et al. Stress fractures in the lower extremity. Radiographics 2007.",
                    "URL": "https://pubmed.ncbi.nlm.nih.gov/17374862/", "Year": "2007"},
                   {"Citation": "Fredericson M et al. Stress fractures in athletes. Top Magn Reson Imaging 2006.",
                    "URL": "https://pubmed.ncbi.nlm.nih.gov/17414997/", "Year": "2006"}]},
    {"id": "T04", "Title": "Pulmonary embolism", "Category": "Chest",
     "Definition": "Occlusion of pulmonary arteries by thrombus, usually from the deep leg veins.",
     "Etiology": "Venous stasis, hypercoagulability, endothelial injury.",
     "Epidemiology": "About 1 per 1000 adults per year.",
     "ClinicalFindings": "Dyspnea, pleuritic pain, tachycardia, hypoxemia.",
     "ImagingFindings": "Intraluminal filling defects on CT pulmonary angiography; right heart strain signs.",
     "Treatment": "Anticoagulation; thrombolysis for massive embolism.",
     "Prognosis": "Mortality rises with right ventricular dysfunction.",
     "Keywords": "pulmonary embolism", "ACRCode": "6.9"},
    {"id": "T05", "Title": "Demyelinating disease", "Category": "Neuroradiology",
     "Definition": "Disorders that damage the myelin sheath of central nervous system axons.",
     "Etiology": "Autoimmune in multiple sclerosis; post-infectious in ADEM.",
     "Pathophysiology": "Inflammatory plaques with demyelination and relative axonal sparing.",
     "ClinicalFindings": "Optic neuritis, sensory symptoms, internuclear ophthalmoplegia.",
     "ImagingFindings": "Ovoid periventricular, juxtacortical, infratentorial and spinal cord T2 lesions.",
     "DifferentialDiagnosis": "Small vessel ischemia, vasculitis, neuromyelitis optica.",
     "Treatment": "Disease-modifying therapy; steroids for relapses.",
     "Keywords": "demyelination; multiple sclerosis", "ACRCode": "1.3",
     "Reference": [{"Citation": "Filippi M et al. MRI criteria for the diagnosis of multiple sclerosis. Lancet Neurol 2016.",
                    "URL": "https://pubmed.ncbi.nlm.nih.gov/26822746/", "Year": "2016"}]},
    {"id": "T06", "Title": "Bone tumors", "Category": "Musculoskeletal",
     "Definition": "Primary benign and malignant neoplasms arising in bone.",
     "Epidemiology": "Osteosarcoma and Ewing sarcoma peak in adolescence.",
     "ClinicalFindings": "Pain, swelling, pathological fracture.",
     "ImagingFindings": "Assess location, margin, matrix and periosteal reaction on radiographs.",
     "DifferentialDiagnosis": "Osteomyelitis, stress fracture, metastasis.",
     "Treatment": "Depends on histology; chemotherapy and resection for sarcomas.",
     "Prognosis": "Localized osteosarcoma five-year survival about 70 percent.",
     "Keywords": "bone tumor; periosteal reaction", "ACRCode": "4.3"},
]

QUESTIONS = [
    {"id": "Q01", "caseId": "MPX1001", "stem": "Which CT finding most increases the likelihood of perforation?",
     "choices": ["Appendiceal diameter of 7 mm", "Extraluminal gas", "Periappendiceal fat stranding",
                 "Mucosal hyperenhancement"],
     "answer": 1, "explanation": "Extraluminal gas and abscess indicate perforation."},
    {"id": "Q02", "caseId": "MPX1002", "stem": "Which feature favours a subdural over an epidural hematoma?",
     "choices": ["Biconvex shape", "Crossing of cranial sutures", "Associated skull fracture"],
     "answer": 1},
    {"id": "Q03", "caseId": "MPX1005", "stem": "Which CT finding indicates right heart strain?",
     "choices": ["RV to LV ratio above 1", "Hampton hump", "Mosaic attenuation", "Pleural effusion"],
     "answer": 0, "explanation": "Right ventricular dilatation predicts adverse outcome."},
    {"id": "Q04", "caseId": "MPX1006", "stem": "Periventricular lesions perpendicular to the ventricles are called",
     "choices": ["Dawson fingers", "Tram-track sign", "Hot cross bun sign", "Eye of the tiger"],
     "answer": 0},
    {"id": "Q05", "caseId": "MPX1007",
     "stem": "What is the most likely finding at the distal second metatarsal on this radiograph?",
     "choices": ["Normal cortex", "Periosteal callus from a stress fracture",
                 "Aggressive sunburst periosteal reaction", "Osteochondral defect"],
     "answer": 1, "explanation": "Fluffy callus around a faint transverse line is typical of a healing march fracture."},
    {"id": "Q06", "caseId": "MPX1009", "stem": "Which part of the scaphoid is at greatest risk of avascular necrosis?",
     "choices": ["Distal pole", "Waist", "Proximal pole", "Tubercle"],
     "answer": 2},
    {"id": "Q07", "caseId": "MPX1004", "stem": "Where does conventional osteosarcoma most often arise?",
     "choices": ["Diaphysis", "Metaphysis", "Epiphysis"],
     "answer": 1, "explanation": "The metaphysis of the distal femur and proximal tibia is typical."},
    {"id": "Q08", "caseId": "MPX1011", "stem": "Achilles ruptures usually occur how far above the insertion?",
     "choices": ["Under 1 cm", "2 to 6 cm", "At the musculotendinous junction only", "Within the calcaneus"],
     "answer": 1},
]


# ----------------------------------------------------- independent count

def leaf_paths(prefix, obj, out):
    for key, value in obj.items():
        items = value if isinstance(value, list) else [value]
        for item in items:
            path = prefix + "/" + key
            out.add(path)
            if isinstance(item, dict):
                leaf_paths(path, item, out)


def element_type_paths():
    """Element type paths the importer is expected to infer."""
    paths = set()
    for case in CASES:
        body = {k: v for k, v in case.items() if k not in ("id", "topics", "questions", "images")}
        leaf_paths("/Cases", body, paths)
        paths.add("/Cases")
        if case.get("topics"):
            paths.add("/Cases/Topics")
        if case.get("questions"):
            paths.add("/Cases/Quiz")
        for img in case.get("images", []):
            paths.update({"/Cases/Images", "/Cases/Images/Image", "/Cases/Images/Image/File"})
            rest = {k: v for k, v in img.items() if k not in ("file", "source_url")}
            leaf_paths("/Cases/Images/Image", rest, paths)
            if "source_url" in img:
                paths.add("/Cases/Images/Image/OriginalImage")
    for topic in TOPICS:
        paths.add("/Topic")
        leaf_paths("/Topic", {k: v for k, v in topic.items() if k != "id"}, paths)
    return paths


# ------------------------------------------------------------------ write

def dump(path, obj):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(obj, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")


def main():
    out = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(__file__).resolve().parent.parent / "fixtures" / "medpix"
    ids = [c["id"] for c in CASES]
    pages = [ids[i:i + PAGE_SIZE] for i in range(0, len(ids), PAGE_SIZE)]
    dump(out / "index.json", {"first_page": "cases/page-1.json", "total_cases": len(CASES),
                              "total_topics": len(TOPICS), "total_questions": len(QUESTIONS),
                              "page_size": PAGE_SIZE, "pages": len(pages)})
    for n, page in enumerate(pages, start=1):
        body = {"page": n, "pages": len(pages), "cases": page}
        if n < len(pages):
            body["next"] = f"cases/page-{n + 1}.json"
        dump(out / "cases" / f"page-{n}.json", body)
    for case in CASES:
        dump(out / "cases" / f"{case['id']}.json", case)
    for topic in TOPICS:
        dump(out / "topics" / f"{topic['id']}.json", topic)
    for q in QUESTIONS:
        dump(out / "questions" / f"{q['id']}.json", q)

    files = sorted({img["file"] for c in CASES for img in c.get("images", [])})
    seeds = {name: i + 1 for i, name in enumerate(sorted(set(files) - set(IMAGE_SEEDS)))}
    (out / "images").mkdir(parents=True, exist_ok=True)
    for name in files:
        seed = seeds[IMAGE_SEEDS.get(name, name)]
        (out / "images" / name).write_bytes(synthetic_image(seed))

    count = len(element_type_paths())
    print(f"wrote {len(CASES)} cases, {len(TOPICS)} topics, {len(QUESTIONS)} questions, "
          f"{len(files)} image files; element types: {count}")


if __name__ == "__main__":
    main()
